/** Single-page wiring: project list on the left, report in the center,
 * tracker on the right, archives behind a toggle. */
import { ApiClient } from "./api.js";
import { createArchiveView } from "./archive.js";
import { collapseAll, renderReport } from "./reportView.js";
import { createTimeline } from "./timeline.js";
import { renderTracker } from "./tracker.js";
import type { ProjectDoc, RevisionDescriptor } from "./types.js";

export function startApp(
  container: HTMLElement,
  api: ApiClient = new ApiClient("", localStorage.getItem("vizcritic-token")),
): void {
  container.innerHTML = `
    <header><h1>vizcritic</h1><nav>
      <button id="nav-report">Report</button>
      <button id="nav-archives">Archives</button>
    </nav></header>
    <main>
      <aside id="projects-pane">
        <form id="project-form"><input id="project-name" placeholder="New project name" />
        <button type="submit">Create</button></form>
        <ul id="project-list"></ul>
        <div id="timeline-holder"></div>
        <form id="upload-form"><input type="file" id="file-input" accept=".png,.jpg,.jpeg" />
        <button type="submit">Upload revision</button></form>
      </aside>
      <section id="report-pane"><button id="collapse-all" hidden>Collapse all</button>
        <div id="report-holder"></div></section>
      <aside id="tracker-pane"></aside>
      <section id="archive-pane" hidden></section>
    </main>`;

  const projectList = container.querySelector<HTMLUListElement>("#project-list")!;
  const timelineHolder = container.querySelector<HTMLElement>("#timeline-holder")!;
  const reportHolder = container.querySelector<HTMLElement>("#report-holder")!;
  const trackerPane = container.querySelector<HTMLElement>("#tracker-pane")!;
  const archivePane = container.querySelector<HTMLElement>("#archive-pane")!;
  const reportPane = container.querySelector<HTMLElement>("#report-pane")!;
  const collapseButton = container.querySelector<HTMLButtonElement>("#collapse-all")!;

  let currentProject: ProjectDoc | null = null;
  let timeline: ReturnType<typeof createTimeline> | null = null;

  async function showReport(revision: RevisionDescriptor): Promise<void> {
    const report = await api.getReport(revision.project_id, revision.sequence);
    reportHolder.replaceChildren(
      renderReport(report, (ref) => api.artifactUrl(revision.project_id, revision.sequence, ref)),
    );
    trackerPane.replaceChildren(renderTracker(report.tracker));
    collapseButton.hidden = false;
  }

  collapseButton.addEventListener("click", () => {
    const report = reportHolder.firstElementChild as HTMLElement | null;
    if (report) collapseAll(report);
  });

  async function selectProject(project: ProjectDoc): Promise<void> {
    currentProject = project;
    timeline?.stopPolling();
    timeline = createTimeline(api, project.id, (revision) => {
      void showReport(revision);
    });
    timelineHolder.replaceChildren(timeline.root);
    const revisions = await timeline.refresh();
    timeline.startPolling();
    const complete = revisions.filter((r) => r.status === "complete");
    if (complete.length > 0) void showReport(complete[complete.length - 1]);
  }

  async function refreshProjects(): Promise<void> {
    const projects = await api.listProjects();
    projectList.replaceChildren();
    for (const project of projects) {
      const item = document.createElement("li");
      item.textContent = project.name;
      item.addEventListener("click", () => void selectProject(project));
      projectList.append(item);
    }
  }

  container.querySelector<HTMLFormElement>("#project-form")!.addEventListener("submit", (event) => {
    event.preventDefault();
    const input = container.querySelector<HTMLInputElement>("#project-name")!;
    if (!input.value.trim()) return;
    void api.createProject(input.value).then(() => {
      input.value = "";
      return refreshProjects();
    });
  });

  container.querySelector<HTMLFormElement>("#upload-form")!.addEventListener("submit", (event) => {
    event.preventDefault();
    const input = container.querySelector<HTMLInputElement>("#file-input")!;
    const file = input.files?.[0];
    if (!file || !currentProject || !timeline) return;
    void file.arrayBuffer().then((buffer) => timeline!.upload(file.name, new Uint8Array(buffer)));
  });

  container.querySelector<HTMLButtonElement>("#nav-archives")!.addEventListener("click", () => {
    if (!currentProject || !timeline) return;
    void api.listRevisions(currentProject.id).then(({ revisions }) => {
      const complete = revisions.filter((r) => r.status === "complete").map((r) => r.sequence);
      const archive = createArchiveView(api, currentProject!.id, complete);
      archivePane.replaceChildren(archive.root);
      archivePane.hidden = false;
      reportPane.hidden = true;
      if (complete.length >= 2) {
        void archive.select("a", complete[0]);
        void archive.select("b", complete[complete.length - 1]);
      }
    });
  });

  container.querySelector<HTMLButtonElement>("#nav-report")!.addEventListener("click", () => {
    archivePane.hidden = true;
    reportPane.hidden = false;
  });

  void refreshProjects();
}
