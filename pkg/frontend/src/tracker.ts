/** Revision tracker panel: per-topic change summaries plus metric delta
 * rows with direction arrows. */
import type { TrackerDoc } from "./types.js";
import { SECTION_ORDER } from "./types.js";

const ARROWS: Record<string, string> = {
  increase: "↑",
  decrease: "↓",
  unchanged: "→",
  incomparable: "—",
};

function fmt(value: number | null): string {
  return value === null ? "-" : value.toFixed(4);
}

export function renderTracker(tracker: TrackerDoc | null): HTMLElement {
  const root = document.createElement("div");
  root.className = "tracker";
  const heading = document.createElement("h2");
  heading.textContent = "Revision tracker";
  root.append(heading);

  if (tracker === null || tracker.first_version) {
    const p = document.createElement("p");
    p.className = "first-version";
    p.textContent = "first version - nothing to compare";
    root.append(p);
    return root;
  }

  const list = document.createElement("ul");
  list.className = "tracker-summaries";
  for (const topic of SECTION_ORDER) {
    if (!(topic in tracker.summaries)) continue;
    const item = document.createElement("li");
    item.dataset.topic = topic;
    item.textContent = `${topic}: ${tracker.summaries[topic]}`;
    list.append(item);
  }
  root.append(list);

  const table = document.createElement("table");
  table.className = "deltas";
  const head = table.createTHead().insertRow();
  for (const label of ["topic", "metric", "previous", "current", "delta", ""]) {
    const cell = document.createElement("th");
    cell.textContent = label;
    head.append(cell);
  }
  const body = table.createTBody();
  for (const delta of tracker.deltas) {
    const row = body.insertRow();
    row.dataset.direction = delta.direction;
    row.insertCell().textContent = delta.topic;
    row.insertCell().textContent = delta.metric;
    row.insertCell().textContent = fmt(delta.prev);
    row.insertCell().textContent = fmt(delta.curr);
    row.insertCell().textContent = delta.direction === "unchanged" ? "no change" : fmt(delta.delta);
    row.insertCell().textContent = ARROWS[delta.direction] ?? "";
  }
  root.append(table);
  return root;
}
