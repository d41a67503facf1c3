/** Canonical report document and service resources, mirroring the API's
 * serialization (schema_version 1). */

export type SectionStatus = "none" | "yellow" | "orange";

export interface SubsectionDoc {
  filter_id: string;
  flagged: boolean;
  clarification: string;
  explanations: string;
  suggestions: string;
  raw_metrics: Record<string, number>;
  artifacts: string[];
  notes: string[];
}

export interface SectionDoc {
  topic: string;
  status: SectionStatus;
  summary: string;
  subsections: SubsectionDoc[];
}

export interface TrackerDelta {
  topic: string;
  metric: string;
  prev: number | null;
  curr: number | null;
  delta: number | null;
  direction: "increase" | "decrease" | "unchanged" | "incomparable";
}

export interface TrackerDoc {
  first_version: boolean;
  summaries: Record<string, string>;
  deltas: TrackerDelta[];
}

export interface ReportDoc {
  schema_version: number;
  revision_id: string;
  created_at: string;
  overview_summary: string;
  sections: SectionDoc[];
  tracker: TrackerDoc | null;
}

export interface RevisionDescriptor {
  id: string;
  project_id: string;
  sequence: number;
  status: "queued" | "analyzing" | "complete" | "failed";
  image_ref: string;
  report_ref: string | null;
  error: { stage: string; message: string } | null;
  uploaded_at: string;
  started_at: string | null;
  finished_at: string | null;
}

export interface ProjectDoc {
  id: string;
  owner: string;
  name: string;
  created_at: string;
  revisions: number[];
}

export const SECTION_ORDER = ["salience", "text", "representation", "color", "accessibility"];

export const STATUS_GLYPHS: Record<SectionStatus, string> = {
  none: "",
  yellow: "\u{1F7E1}",
  orange: "\u{1F7E0}",
};
