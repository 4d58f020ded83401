// Mounts the runtime onto a built page: replaces cell placeholders
// with editors and wires the run/next/check controls.

import { HttpApiClient, type ApiClient } from "./api.js";
import { CellController, programContextFor, type CellStatus } from "./cells.js";
import { parseManifest, type ManifestCell } from "./manifest.js";
import type { Tone } from "./protocol.js";

export interface CellView {
  cell_id: string;
  kind: ManifestCell["kind"];
  controller: CellController | null;
  editor: HTMLTextAreaElement | null;
}

export function mount(doc: Document, api?: ApiClient): CellView[] {
  const script = doc.getElementById("cell-manifest");
  const parsed = parseManifest(script?.textContent ?? null);
  if (!parsed.ok) {
    banner(doc, `interactive cells unavailable: ${parsed.error}`);
    return [];
  }
  const manifest = parsed.manifest;
  const client = api ?? new HttpApiClient("");
  const editors = new Map<string, HTMLTextAreaElement>();
  const views: CellView[] = [];

  manifest.cells.forEach((cell, index) => {
    const placeholder = doc.querySelector<HTMLElement>(
      `[data-cell-id="${cell.cell_id}"]`,
    );
    if (placeholder === null) {
      return;
    }
    if (cell.kind === "static") {
      views.push({ cell_id: cell.cell_id, kind: cell.kind, controller: null, editor: null });
      return;
    }

    const editor = doc.createElement("textarea");
    editor.className = "cell-editor";
    editor.value = cell.initial_text;
    editor.rows = Math.max(2, cell.initial_text.split("\n").length + 1);
    editor.spellcheck = false;
    placeholder.replaceChildren(editor);
    editors.set(cell.cell_id, editor);

    if (cell.kind === "program") {
      views.push({ cell_id: cell.cell_id, kind: cell.kind, controller: null, editor });
      return;
    }

    const toolbar = doc.createElement("div");
    toolbar.className = "cell-toolbar";
    const result = doc.createElement("pre");
    result.className = "cell-result";
    const statusLabel = doc.createElement("span");
    statusLabel.className = "cell-status";

    const buttons: HTMLButtonElement[] = [];
    const makeButton = (label: string, onClick: () => void): HTMLButtonElement => {
      const button = doc.createElement("button");
      button.type = "button";
      button.textContent = label;
      button.addEventListener("click", onClick);
      toolbar.appendChild(button);
      buttons.push(button);
      return button;
    };

    const host = {
      getText: () => editor.value,
      setResult: (text: string, tone: Tone) => {
        result.textContent = text;
        result.className = `cell-result ${tone === "ok" ? "ok" : tone === "err" ? "err" : ""}`;
      },
      setStatus: (status: CellStatus) => {
        statusLabel.textContent = status === "running" ? "running..." : "";
        for (const button of buttons) {
          button.disabled = status === "running";
        }
      },
      setMore: (more: boolean) => {
        if (nextButton !== null) {
          nextButton.hidden = !more;
        }
      },
    };

    const controller = new CellController(
      cell,
      host,
      client,
      () => programContextFor(manifest, index, (id) => editors.get(id)?.value ?? ""),
      manifest.page,
    );

    let nextButton: HTMLButtonElement | null = null;
    if (cell.kind === "query") {
      makeButton("Run", () => void controller.run());
      nextButton = makeButton("Next answer", () => void controller.next());
      nextButton.hidden = true;
    } else {
      makeButton("Check", () => void controller.checkSolution());
    }
    toolbar.appendChild(statusLabel);
    placeholder.appendChild(toolbar);
    placeholder.appendChild(result);

    views.push({ cell_id: cell.cell_id, kind: cell.kind, controller, editor });
  });
  return views;
}

function banner(doc: Document, message: string): void {
  const div = doc.createElement("div");
  div.className = "runtime-banner";
  div.textContent = message;
  const main = doc.querySelector("main");
  (main ?? doc.body).prepend(div);
}
