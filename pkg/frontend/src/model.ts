/** Pure view-model logic: everything the renderers show is derived here,
 * directly from API fields. Nothing is recomputed client-side: hazard,
 * statistics, and region bounds arrive finished from the server. */

import type {
  GroupDoc,
  PointDoc,
  TrendResponse,
  TriageState,
} from "./types.js";

// ----------------------------------------------------------------------
// triage table

export interface TableRow {
  id: string;
  seriesId: string;
  revision: string;
  test: string;
  task: string;
  date: string | null;
  hazard: number | null;
  state: TriageState;
  ticketIds: string[];
}

export interface TableGroup {
  project: string;
  revision: string;
  order: number;
  date: string | null;
  rows: TableRow[];
}

export type SortKey = "hazard" | "date" | "test" | "task";

function seriesId(point: PointDoc): string {
  const s = point.series;
  return [s.project, s.variant, s.task, s.test, s.config, s.measurement].join("/");
}

export function buildTableModel(groups: GroupDoc[]): TableGroup[] {
  return groups.map((group) => ({
    project: group.project,
    revision: group.revision,
    order: group.order,
    date: group.date,
    rows: group.points.map((point) => ({
      id: point.id,
      seriesId: seriesId(point),
      revision: point.revision,
      test: point.series.test,
      task: point.series.task,
      date: point.date,
      hazard: point.hazard,
      state: point.triage_state,
      ticketIds: point.tickets.map((t) => t.ticket_id),
    })),
  }));
}

/** Re-sort rows inside each group; groups stay in server (newest-first)
 * order. Hazard sorts by |hazard| descending with unknown hazards last. */
export function sortRows(groups: TableGroup[], key: SortKey): TableGroup[] {
  const compare = (a: TableRow, b: TableRow): number => {
    switch (key) {
      case "hazard": {
        const am = a.hazard === null ? -Infinity : Math.abs(a.hazard);
        const bm = b.hazard === null ? -Infinity : Math.abs(b.hazard);
        return bm - am || a.test.localeCompare(b.test);
      }
      case "date":
        return (b.date ?? "").localeCompare(a.date ?? "") || a.test.localeCompare(b.test);
      case "task":
        return a.task.localeCompare(b.task) || a.test.localeCompare(b.test);
      default:
        return a.test.localeCompare(b.test) || a.seriesId.localeCompare(b.seriesId);
    }
  };
  return groups.map((g) => ({ ...g, rows: [...g.rows].sort(compare) }));
}

/** Optimistic removal of actioned rows; groups left empty disappear. */
export function removeRows(groups: TableGroup[], ids: Iterable<string>): TableGroup[] {
  const gone = new Set(ids);
  return groups
    .map((g) => ({ ...g, rows: g.rows.filter((r) => !gone.has(r.id)) }))
    .filter((g) => g.rows.length > 0);
}

export function allRowIds(groups: TableGroup[]): string[] {
  return groups.flatMap((g) => g.rows.map((r) => r.id));
}

/** Acknowledge/hide with an optimistic update that rolls back when the
 * call fails. Returns the table to display plus the outcome. */
export async function performTriage(
  groups: TableGroup[],
  ids: string[],
  action: "acknowledge" | "hide",
  post: (action: "acknowledge" | "hide", ids: string[]) => Promise<void>,
): Promise<{ groups: TableGroup[]; ok: boolean; error?: string }> {
  if (ids.length === 0) {
    return { groups, ok: false, error: "nothing selected" };
  }
  const optimistic = removeRows(groups, ids);
  try {
    await post(action, ids);
    return { groups: optimistic, ok: true };
  } catch (error) {
    return { groups, ok: false, error: String(error) };
  }
}

export function formatHazard(hazard: number | null): string {
  if (hazard === null) return "n/a";
  const sign = hazard > 0 ? "+" : "";
  return `${sign}${hazard.toFixed(3)}`;
}

// ----------------------------------------------------------------------
// trend geometry

export interface TrendSegment {
  x0: number;
  x1: number;
  startOrder: number;
  endOrder: number;
  state: TriageState | "baseline";
}

export interface TrendMarker {
  x: number;
  y: number;
  ticketId: string;
  summary: string;
  revision: string;
}

export interface TrendGeometry {
  width: number;
  height: number;
  polyline: string;
  points: { x: number; y: number; order: number; value: number }[];
  segments: TrendSegment[];
  markers: TrendMarker[];
}

const PAD = 28;

/** Project the trend payload onto pixel space. Stable-region segments tile
 * the analyzed window and carry the triage state of the change point that
 * opened them (the leading region is baseline). Ticket markers land on
 * revisions that exist in the plotted series. */
export function trendGeometry(
  trend: TrendResponse,
  width = 900,
  height = 260,
): TrendGeometry {
  const values = trend.values;
  if (values.length === 0) {
    return { width, height, polyline: "", points: [], segments: [], markers: [] };
  }
  const orders = values.map((v) => v.order);
  const loOrder = Math.min(...orders);
  const hiOrder = Math.max(...orders);
  const spanX = Math.max(hiOrder - loOrder, 1);
  const vals = values.map((v) => v.value);
  const loVal = Math.min(...vals);
  const hiVal = Math.max(...vals);
  const spanY = Math.max(hiVal - loVal, 1e-9);

  const x = (order: number) => PAD + ((order - loOrder) / spanX) * (width - 2 * PAD);
  const y = (value: number) =>
    height - PAD - ((value - loVal) / spanY) * (height - 2 * PAD);

  const points = values.map((v) => ({
    x: x(v.order),
    y: y(v.value),
    order: v.order,
    value: v.value,
  }));
  const polyline = points.map((p) => `${p.x.toFixed(1)},${p.y.toFixed(1)}`).join(" ");

  // segments[i] is region_after of change_points[i-1]; segments[0] leads.
  const stateByStart = new Map<number, TriageState>(
    trend.change_points.map((p) => [p.region_after.start_order, p.triage_state]),
  );
  const segments: TrendSegment[] = trend.segments.map((region, i) => ({
    x0: x(region.start_order),
    x1: x(region.end_order),
    startOrder: region.start_order,
    endOrder: region.end_order,
    state: i === 0 ? "baseline" : stateByStart.get(region.start_order) ?? "baseline",
  }));

  const orderToValue = new Map(values.map((v) => [v.order, v.value]));
  const markers: TrendMarker[] = trend.tickets
    .filter((t) => orderToValue.has(t.order))
    .map((t) => ({
      x: x(t.order),
      y: y(orderToValue.get(t.order)!),
      ticketId: t.ticket_id,
      summary: t.summary,
      revision: t.revision,
    }));

  return { width, height, polyline, points, segments, markers };
}

/** CSS class for a segment; hidden points recolor their segment. */
export function segmentClass(state: TrendSegment["state"]): string {
  switch (state) {
    case "baseline":
      return "segment baseline";
    case "hidden":
      return "segment hidden";
    case "acknowledged":
      return "segment acknowledged";
    default:
      return "segment unprocessed";
  }
}
