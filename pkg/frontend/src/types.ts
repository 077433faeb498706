/** Payload shapes of the /api/v1 contract the UI consumes. */

export interface SeriesFields {
  project: string;
  variant: string;
  task: string;
  test: string;
  config: string;
  measurement: string;
}

export interface RegionDoc {
  start_order: number;
  end_order: number;
  count: number;
  min: number;
  max: number;
  median: number;
  mean: number;
  variance: number;
}

export type TriageState = "unprocessed" | "acknowledged" | "hidden";

export interface TicketMatchDoc {
  ticket_id: string;
  summary: string;
  matched_on: "first_failing" | "fix";
  matched_revision: string;
  ambiguous: boolean;
}

export interface PointDoc {
  id: string;
  series: SeriesFields;
  revision: string;
  order_index: number;
  qhat: number;
  p_value: number;
  hazard: number | null;
  region_before: RegionDoc;
  region_after: RegionDoc;
  suspect_range: { revisions: string[]; truncated: boolean };
  computed_at: string;
  date: string | null;
  triage_state: TriageState;
  tickets: TicketMatchDoc[];
  tags: string[];
  direction: string;
}

export interface GroupDoc {
  project: string;
  revision: string;
  order: number;
  date: string | null;
  points: PointDoc[];
  summary: {
    total: number;
    unprocessed: number;
    acknowledged: number;
    hidden: number;
  };
}

export interface ListResponse {
  status: "unprocessed" | "processed";
  groups: GroupDoc[];
  next_cursor: string | null;
}

export interface ValueDoc {
  revision: string;
  order: number;
  timestamp: string;
  value: number;
}

export interface TrendPointDoc extends Omit<PointDoc, "date" | "tags" | "direction"> {
  triage_state: TriageState;
  tickets: TicketMatchDoc[];
}

export interface TicketMarkerDoc {
  ticket_id: string;
  summary: string;
  revision: string;
  order: number;
  matched_on: "first_failing" | "fix";
}

export interface TrendResponse {
  series: SeriesFields;
  series_id: string;
  meta: { direction: string; tags: string[] };
  values: ValueDoc[];
  segments: RegionDoc[];
  change_points: TrendPointDoc[];
  tickets: TicketMarkerDoc[];
}

export interface TriageActionResponse {
  records: unknown[];
  warnings: { id: string; reason: string }[];
}

export interface ListFilter {
  test?: string;
  task?: string;
  minHazard?: number | null;
  sort?: "hazard" | "date" | "test";
  includeTags?: string[];
}
