// Request/response shapes of the evaluate-and-grade HTTP API
// (protocol_version 1) and rendering of engine answers.

export interface EvalRequest {
  engine_id: string;
  program: string;
  query: string;
  max_answers: number;
  max_depth?: number;
  max_steps?: number;
}

export interface EvalAnswer {
  bindings: Record<string, string>;
  depth: number;
}

export interface EvalResponse {
  status: "ok" | "error";
  answers?: EvalAnswer[];
  more?: boolean;
  error?: string;
}

export interface CheckRequest {
  page: string;
  cell_id: string;
  submission: string;
}

export type VerdictKind = "pass" | "fail" | "error";

export interface CheckResponse {
  verdict: VerdictKind;
  feedback: string;
}

export type Tone = "ok" | "warn" | "err";

export interface Rendered {
  text: string;
  tone: Tone;
  // true while further answers may exist (enables the "next" control)
  more: boolean;
}

export function renderAnswers(resp: EvalResponse): Rendered {
  if (resp.status !== "ok") {
    // budget errors and engine errors are not a plain "no"
    return { text: `error: ${resp.error ?? "evaluation failed"}`, tone: "err", more: false };
  }
  const answers = resp.answers ?? [];
  if (answers.length === 0) {
    return { text: "no", tone: "warn", more: false };
  }
  const blocks = answers.map((answer) => {
    const lines = Object.entries(answer.bindings).map(
      ([name, value]) => `${name} = ${value}`,
    );
    return lines.length > 0 ? lines.join("\n") : "yes";
  });
  return { text: blocks.join("\n;\n"), tone: "ok", more: resp.more === true };
}

export function renderVerdict(resp: CheckResponse): Rendered {
  if (resp.verdict === "pass") {
    return { text: resp.feedback, tone: "ok", more: false };
  }
  return { text: resp.feedback, tone: resp.verdict === "fail" ? "warn" : "err", more: false };
}
