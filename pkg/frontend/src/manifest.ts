// The embedded JSON cell manifest a built page carries (protocol_version 1).

export const SUPPORTED_PROTOCOL = 1;

export type CellKind = "program" | "query" | "static" | "exercise";

const KINDS: readonly string[] = ["program", "query", "static", "exercise"];

export interface ManifestCell {
  cell_id: string;
  kind: CellKind;
  engine_id: string;
  initial_text: string;
  checker?: string;
  query?: string;
}

export interface CellManifest {
  page: string;
  protocol_version: number;
  cells: ManifestCell[];
}

export type ManifestResult =
  | { ok: true; manifest: CellManifest }
  | { ok: false; error: string };

export function parseManifest(raw: string | null | undefined): ManifestResult {
  if (raw == null || raw.trim() === "") {
    return { ok: false, error: "page carries no cell manifest" };
  }
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch (err) {
    return { ok: false, error: `cell manifest is not valid JSON: ${String(err)}` };
  }
  if (typeof data !== "object" || data === null) {
    return { ok: false, error: "cell manifest must be a JSON object" };
  }
  const obj = data as Record<string, unknown>;
  if (obj.protocol_version !== SUPPORTED_PROTOCOL) {
    return {
      ok: false,
      error: `unsupported manifest protocol: ${String(obj.protocol_version)}`,
    };
  }
  if (typeof obj.page !== "string" || !Array.isArray(obj.cells)) {
    return { ok: false, error: "cell manifest needs a page name and a cells array" };
  }
  const cells: ManifestCell[] = [];
  for (const entry of obj.cells) {
    const cell = asCell(entry);
    if (cell === null) {
      return { ok: false, error: `malformed cell entry: ${JSON.stringify(entry)}` };
    }
    cells.push(cell);
  }
  return {
    ok: true,
    manifest: { page: obj.page, protocol_version: SUPPORTED_PROTOCOL, cells },
  };
}

function asCell(entry: unknown): ManifestCell | null {
  if (typeof entry !== "object" || entry === null) {
    return null;
  }
  const raw = entry as Record<string, unknown>;
  if (
    typeof raw.cell_id !== "string" ||
    typeof raw.engine_id !== "string" ||
    typeof raw.initial_text !== "string" ||
    typeof raw.kind !== "string" ||
    !KINDS.includes(raw.kind)
  ) {
    return null;
  }
  const cell: ManifestCell = {
    cell_id: raw.cell_id,
    kind: raw.kind as CellKind,
    engine_id: raw.engine_id,
    initial_text: raw.initial_text,
  };
  if (typeof raw.checker === "string") {
    cell.checker = raw.checker;
  }
  if (typeof raw.query === "string") {
    cell.query = raw.query;
  }
  return cell;
}
