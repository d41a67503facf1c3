/** Archives: two independently selectable past reports side by side,
 * for the qualitative comparisons the metric tracker cannot capture. */
import type { ApiClient } from "./api.js";
import { renderReport } from "./reportView.js";
import type { ReportDoc } from "./types.js";

export interface ArchiveController {
  root: HTMLElement;
  select(side: "a" | "b", sequence: number): Promise<void>;
}

export function createArchiveView(
  api: ApiClient,
  projectId: string,
  completedSequences: number[],
): ArchiveController {
  const root = document.createElement("div");
  root.className = "archive";

  if (completedSequences.length < 2) {
    const hint = document.createElement("p");
    hint.className = "archive-disabled";
    hint.textContent = "Archives need at least two completed revisions.";
    root.append(hint);
    return { root, select: async () => undefined };
  }

  const panes: Record<"a" | "b", HTMLElement> = {
    a: document.createElement("div"),
    b: document.createElement("div"),
  };
  const selectors: Record<"a" | "b", HTMLSelectElement> = {
    a: document.createElement("select"),
    b: document.createElement("select"),
  };

  for (const side of ["a", "b"] as const) {
    const pane = panes[side];
    pane.className = `archive-pane archive-${side}`;
    const selector = selectors[side];
    selector.className = "archive-select";
    for (const seq of completedSequences) {
      const option = document.createElement("option");
      option.value = String(seq);
      option.textContent = `revision ${seq}`;
      selector.append(option);
    }
    selector.addEventListener("change", () => {
      void select(side, Number(selector.value));
    });
    const holder = document.createElement("div");
    holder.className = "archive-report";
    pane.append(selector, holder);
    root.append(pane);
  }

  async function select(side: "a" | "b", sequence: number): Promise<void> {
    const report: ReportDoc = await api.getReport(projectId, sequence);
    const holder = panes[side].querySelector<HTMLElement>(".archive-report")!;
    holder.replaceChildren(
      renderReport(report, (ref) => api.artifactUrl(projectId, sequence, ref)),
    );
    selectors[side].value = String(sequence);
  }

  return { root, select };
}
