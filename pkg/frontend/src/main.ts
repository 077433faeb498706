/** Single-page wiring: hash routes for the unprocessed/processed lists and
 * per-series trend graphs, with polling refresh and optimistic triage. */

import { ApiClient } from "./api.js";
import {
  allRowIds,
  buildTableModel,
  performTriage,
  sortRows,
  SortKey,
  TableGroup,
  trendGeometry,
} from "./model.js";
import { renderTable } from "./table.js";
import { renderTrend } from "./trend.js";
import type { ListFilter } from "./types.js";

const POLL_INTERVAL_MS = 30_000;

const api = new ApiClient();

interface UiState {
  route: string;
  groups: TableGroup[];
  selection: Set<string>;
  sort: SortKey;
  filter: ListFilter;
  notice: string | null;
}

const state: UiState = {
  route: location.hash || "#/unprocessed",
  groups: [],
  selection: new Set(),
  sort: "hazard",
  filter: {},
  notice: null,
};

function content(): HTMLElement {
  return document.getElementById("content")!;
}

function notice(message: string | null): void {
  state.notice = message;
  const el = document.getElementById("notice")!;
  el.textContent = message ?? "";
  el.className = message ? "notice visible" : "notice";
}

async function refreshList(): Promise<void> {
  const processed = state.route === "#/processed";
  const response = await api.listChangePoints(
    processed ? "processed" : "unprocessed",
    { ...state.filter, sort: state.sort === "task" ? "test" : state.sort },
  );
  state.groups = sortRows(buildTableModel(response.groups), state.sort);
  renderList();
}

function renderList(): void {
  const processed = state.route === "#/processed";
  const table = renderTable(
    state.groups,
    state.selection,
    {
      onToggle(id, checked) {
        if (checked) state.selection.add(id);
        else state.selection.delete(id);
      },
      onToggleGroup(ids, checked) {
        for (const id of ids) {
          if (checked) state.selection.add(id);
          else state.selection.delete(id);
        }
        renderList();
      },
      onTrendLink(seriesId) {
        location.hash = `#/trend/${seriesId}`;
      },
    },
    processed ? "nothing processed yet" : "triage queue is empty: nothing unprocessed",
  );
  content().replaceChildren(table);
}

async function act(action: "acknowledge" | "hide"): Promise<void> {
  const ids = [...state.selection];
  const result = await performTriage(state.groups, ids, action, async (a, actioned) => {
    await api.triage(a, actioned, "build-baron");
  });
  state.groups = result.groups;
  if (result.ok) {
    state.selection.clear();
    notice(null);
  } else {
    notice(`action failed, rolled back: ${result.error ?? "unknown error"}`);
  }
  renderList();
}

async function showTrend(seriesId: string): Promise<void> {
  const trend = await api.trend(seriesId);
  const geometry = trendGeometry(trend);
  content().replaceChildren(
    renderTrend(geometry, `${trend.series.test}: ${trend.series.task} (${trend.series.project})`),
  );
}

async function route(): Promise<void> {
  state.route = location.hash || "#/unprocessed";
  document.querySelectorAll("nav a").forEach((a) => {
    a.classList.toggle("active", a.getAttribute("href") === state.route);
  });
  const actions = document.getElementById("actions")!;
  try {
    if (state.route.startsWith("#/trend/")) {
      actions.style.display = "none";
      await showTrend(state.route.slice("#/trend/".length));
    } else {
      actions.style.display = "";
      await refreshList();
    }
    notice(state.notice);
  } catch (error) {
    notice(`load failed: ${String(error)}`);
  }
}

function wireControls(): void {
  document.getElementById("btn-acknowledge")!.addEventListener("click", () => act("acknowledge"));
  document.getElementById("btn-hide")!.addEventListener("click", () => act("hide"));
  const sortSelect = document.getElementById("sort") as HTMLSelectElement;
  sortSelect.addEventListener("change", () => {
    state.sort = sortSelect.value as SortKey;
    state.groups = sortRows(state.groups, state.sort);
    renderList();
  });
  const testFilter = document.getElementById("filter-test") as HTMLInputElement;
  const hazardFilter = document.getElementById("filter-hazard") as HTMLInputElement;
  const canaryToggle = document.getElementById("show-canary") as HTMLInputElement;
  const apply = () => {
    state.filter = {
      test: testFilter.value || undefined,
      minHazard: hazardFilter.value ? Number(hazardFilter.value) : null,
      includeTags: canaryToggle.checked ? ["canary", "informational"] : [],
    };
    void route();
  };
  testFilter.addEventListener("change", apply);
  hazardFilter.addEventListener("change", apply);
  canaryToggle.addEventListener("change", apply);
}

window.addEventListener("hashchange", () => void route());
window.addEventListener("DOMContentLoaded", () => {
  wireControls();
  void route();
  setInterval(() => {
    if (!state.route.startsWith("#/trend/")) void route();
  }, POLL_INTERVAL_MS);
});
