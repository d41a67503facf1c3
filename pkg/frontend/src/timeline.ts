/** Project timeline: revisions in upload order with status, upload with
 * client-side pre-checks, and 2 s polling while analysis runs. */
import type { ApiClient } from "./api.js";
import type { RevisionDescriptor } from "./types.js";
import { checkUpload } from "./validate.js";

export const POLL_INTERVAL_MS = 2000;

export interface TimelineController {
  root: HTMLElement;
  refresh(): Promise<RevisionDescriptor[]>;
  upload(filename: string, bytes: Uint8Array): Promise<RevisionDescriptor>;
  startPolling(): void;
  stopPolling(): void;
}

export function createTimeline(
  api: ApiClient,
  projectId: string,
  onSelect: (revision: RevisionDescriptor) => void,
  scheduler: { set: typeof setInterval; clear: typeof clearInterval } = {
    set: setInterval.bind(globalThis),
    clear: clearInterval.bind(globalThis),
  },
): TimelineController {
  const root = document.createElement("div");
  root.className = "timeline";
  const list = document.createElement("ol");
  list.className = "revision-list";
  const error = document.createElement("p");
  error.className = "upload-error";
  error.hidden = true;
  root.append(error, list);

  let timer: ReturnType<typeof setInterval> | null = null;

  function renderEntries(revisions: RevisionDescriptor[]): void {
    list.replaceChildren();
    if (revisions.length === 0) {
      const cta = document.createElement("li");
      cta.className = "upload-cta";
      cta.textContent = "No revisions yet - upload a chart screenshot to get feedback.";
      list.append(cta);
      return;
    }
    for (const revision of revisions) {
      const item = document.createElement("li");
      item.className = `revision status-${revision.status}`;
      item.dataset.sequence = String(revision.sequence);
      const label = document.createElement("span");
      label.textContent = `revision ${revision.sequence}`;
      const status = document.createElement("span");
      status.className = "status";
      status.textContent =
        revision.status === "analyzing" || revision.status === "queued"
          ? `${revision.status}…`
          : revision.status;
      if (revision.status === "failed" && revision.error) {
        status.title = `stage ${revision.error.stage}: ${revision.error.message}`;
      }
      item.append(label, status);
      if (revision.status === "complete") {
        item.addEventListener("click", () => onSelect(revision));
      }
      list.append(item);
    }
  }

  async function refresh(): Promise<RevisionDescriptor[]> {
    const { revisions } = await api.listRevisions(projectId);
    renderEntries(revisions);
    const pending = revisions.some((r) => r.status === "queued" || r.status === "analyzing");
    if (!pending) stopPolling();
    return revisions;
  }

  async function upload(filename: string, bytes: Uint8Array): Promise<RevisionDescriptor> {
    const check = checkUpload(filename, bytes);
    if (!check.ok) {
      error.hidden = false;
      error.textContent = check.reason ?? "invalid file";
      throw new Error(check.reason);
    }
    error.hidden = true;
    const record = await api.uploadRevision(projectId, filename, bytes);
    await refresh();
    startPolling();
    return record;
  }

  function startPolling(): void {
    if (timer === null) {
      timer = scheduler.set(() => {
        void refresh();
      }, POLL_INTERVAL_MS);
    }
  }

  function stopPolling(): void {
    if (timer !== null) {
      scheduler.clear(timer);
      timer = null;
    }
  }

  return { root, refresh, upload, startPolling, stopPolling };
}
