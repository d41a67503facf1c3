/** Interactive hierarchical report rendering.
 *
 * Three levels: section summaries with status dots are always visible;
 * expanding a section lists its filter subsections (clarification +
 * explanations + suggestions); expanding a subsection reveals the raw
 * metrics table, artifact images, and notes. Expansion state lives in
 * the DOM only and never alters report content.
 */
import type { ReportDoc, SectionDoc, SubsectionDoc } from "./types.js";
import { STATUS_GLYPHS } from "./types.js";

export interface ArtifactResolver {
  (ref: string): string;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function metricsTable(metrics: Record<string, number>): HTMLTableElement {
  const table = el("table", "metrics");
  const head = table.createTHead().insertRow();
  head.insertCell().textContent = "metric";
  head.insertCell().textContent = "value";
  const body = table.createTBody();
  for (const name of Object.keys(metrics).sort()) {
    const row = body.insertRow();
    row.insertCell().textContent = name;
    row.insertCell().textContent = String(metrics[name]);
  }
  return table;
}

function renderSubsection(sub: SubsectionDoc, artifactUrl: ArtifactResolver): HTMLElement {
  const details = el("details", "subsection");
  details.dataset.filterId = sub.filter_id;
  const summary = el("summary");
  summary.append(
    el("span", "filter-name", sub.filter_id),
    el("span", sub.flagged ? "flag flagged" : "flag", sub.flagged ? "issue" : "ok"),
  );
  details.append(summary);

  const body = el("div", "subsection-body");
  body.append(el("p", "clarification", sub.clarification));
  const explanations = el("p", "explanations");
  explanations.append(el("strong", undefined, "Explanations: "), document.createTextNode(sub.explanations));
  const suggestions = el("p", "suggestions");
  suggestions.append(el("strong", undefined, "Suggestions: "), document.createTextNode(sub.suggestions));
  body.append(explanations, suggestions);

  if (Object.keys(sub.raw_metrics).length > 0) {
    body.append(metricsTable(sub.raw_metrics));
  }
  for (const ref of sub.artifacts) {
    const img = el("img", "artifact");
    img.src = artifactUrl(ref);
    img.alt = `${sub.filter_id} artifact ${ref}`;
    body.append(img);
  }
  for (const note of sub.notes) {
    body.append(el("p", "note", note));
  }
  details.append(body);
  return details;
}

function renderSection(section: SectionDoc, artifactUrl: ArtifactResolver): HTMLElement {
  const details = el("details", "section");
  details.dataset.topic = section.topic;
  details.dataset.status = section.status;
  const summary = el("summary");
  const glyph = STATUS_GLYPHS[section.status];
  summary.append(
    el("span", "dot", glyph),
    el("span", "topic", section.topic),
    el("span", "section-summary", section.summary),
  );
  details.append(summary);
  const body = el("div", "section-body");
  for (const sub of section.subsections) {
    body.append(renderSubsection(sub, artifactUrl));
  }
  details.append(body);
  return details;
}

export function renderReport(report: ReportDoc, artifactUrl: ArtifactResolver): HTMLElement {
  const root = el("div", "report");
  root.dataset.revisionId = report.revision_id;

  const overview = el("div", "overview");
  overview.append(el("h2", undefined, "Overview"));
  for (const line of report.overview_summary.split("\n")) {
    overview.append(el("p", "overview-line", line));
  }
  root.append(overview);

  for (const section of report.sections) {
    root.append(renderSection(section, artifactUrl));
  }
  return root;
}

export function expandSection(root: HTMLElement, topic: string): void {
  const section = root.querySelector<HTMLDetailsElement>(`details.section[data-topic="${topic}"]`);
  if (section) section.open = true;
}

export function expandSubsection(root: HTMLElement, filterId: string): void {
  const sub = root.querySelector<HTMLDetailsElement>(
    `details.subsection[data-filter-id="${filterId}"]`,
  );
  if (sub) {
    const parent = sub.closest<HTMLDetailsElement>("details.section");
    if (parent) parent.open = true;
    sub.open = true;
  }
}

export function collapseAll(root: HTMLElement): void {
  root.querySelectorAll<HTMLDetailsElement>("details").forEach((d) => {
    d.open = false;
  });
}
