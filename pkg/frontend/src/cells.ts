// Cell view state and control logic, independent of the DOM. dom.ts
// adapts real page elements to the CellHost interface; tests drive the
// controllers with a recording host.

import type { ApiClient } from "./api.js";
import { ApiError } from "./api.js";
import type { CellManifest, ManifestCell } from "./manifest.js";
import { renderAnswers, renderVerdict, type Tone } from "./protocol.js";

export type CellStatus = "idle" | "running" | "done" | "error";

export interface CellHost {
  getText(): string;
  setResult(text: string, tone: Tone): void;
  setStatus(status: CellStatus): void;
  // whether another answer may exist; toggles the "next" control
  setMore(more: boolean): void;
}

const DEFAULT_DEPTH = 64;

export class CellController {
  status: CellStatus = "idle";
  answerCursor = 1;
  retryable = false;
  private inFlight = false;

  constructor(
    readonly cell: ManifestCell,
    private readonly host: CellHost,
    private readonly api: ApiClient,
    private readonly programContext: () => string,
    private readonly page: string,
  ) {}

  /** Evaluate the query against the nearest preceding program cell. */
  async run(): Promise<void> {
    await this.evaluate(1);
  }

  /** Ask for one more answer than last time and re-render. */
  async next(): Promise<void> {
    await this.evaluate(this.answerCursor + 1);
  }

  private async evaluate(maxAnswers: number): Promise<void> {
    if (this.inFlight || this.cell.kind !== "query") {
      return;
    }
    this.inFlight = true;
    this.setStatus("running");
    try {
      const response = await this.api.evaluate({
        engine_id: this.cell.engine_id,
        program: this.programContext(),
        query: this.host.getText(),
        max_answers: maxAnswers,
        max_depth: DEFAULT_DEPTH,
      });
      this.answerCursor = maxAnswers;
      const rendered = renderAnswers(response);
      this.host.setResult(rendered.text, rendered.tone);
      this.host.setMore(rendered.more);
      this.setStatus(rendered.tone === "err" ? "error" : "done");
      this.retryable = false;
    } catch (err) {
      this.fail(err);
    } finally {
      this.inFlight = false;
    }
  }

  /** Grade the current editor contents against the hidden solution. */
  async checkSolution(): Promise<void> {
    if (this.inFlight || this.cell.kind !== "exercise") {
      return;
    }
    this.inFlight = true;
    this.setStatus("running");
    try {
      const response = await this.api.check({
        page: this.page,
        cell_id: this.cell.cell_id,
        submission: this.host.getText(),
      });
      const rendered = renderVerdict(response);
      this.host.setResult(rendered.text, rendered.tone);
      this.host.setMore(false);
      this.setStatus(response.verdict === "pass" ? "done" : "error");
      this.retryable = false;
    } catch (err) {
      this.fail(err);
    } finally {
      this.inFlight = false;
    }
  }

  private fail(err: unknown): void {
    this.retryable = err instanceof ApiError ? err.retryable : false;
    const message = err instanceof Error ? err.message : String(err);
    this.host.setResult(`error: ${message}${this.retryable ? " (retry?)" : ""}`, "err");
    this.host.setMore(false);
    this.setStatus("error");
  }

  private setStatus(status: CellStatus): void {
    this.status = status;
    this.host.setStatus(status);
  }
}

/**
 * The program context of a query cell is the current text of the
 * nearest preceding program cell on the page (queries follow the
 * program they exercise).
 */
export function programContextFor(
  manifest: CellManifest,
  index: number,
  currentText: (cellId: string) => string,
): string {
  for (let i = index - 1; i >= 0; i--) {
    const cell = manifest.cells[i];
    if (cell !== undefined && cell.kind === "program") {
      return currentText(cell.cell_id);
    }
  }
  return "";
}
