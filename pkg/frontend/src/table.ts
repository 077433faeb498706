/** DOM rendering of the triage table. Dumb loops over the view model;
 * all decisions live in model.ts. */

import { formatHazard, TableGroup } from "./model.js";

export interface TableCallbacks {
  onToggle(id: string, checked: boolean): void;
  onToggleGroup(ids: string[], checked: boolean): void;
  onTrendLink(seriesId: string): void;
}

export function renderTable(
  groups: TableGroup[],
  selection: ReadonlySet<string>,
  callbacks: TableCallbacks,
  emptyMessage: string,
): HTMLElement {
  const container = document.createElement("div");
  container.className = "triage-table";
  if (groups.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = emptyMessage;
    container.appendChild(empty);
    return container;
  }

  for (const group of groups) {
    const section = document.createElement("section");
    section.className = "revision-group";
    section.dataset.revision = group.revision;

    const header = document.createElement("header");
    const groupCheck = document.createElement("input");
    groupCheck.type = "checkbox";
    groupCheck.title = "select whole group";
    groupCheck.checked = group.rows.every((r) => selection.has(r.id));
    groupCheck.addEventListener("change", () =>
      callbacks.onToggleGroup(group.rows.map((r) => r.id), groupCheck.checked),
    );
    header.appendChild(groupCheck);

    const hash = document.createElement("code");
    hash.className = "git-hash";
    hash.textContent = group.revision;
    header.appendChild(hash);

    const meta = document.createElement("span");
    meta.className = "group-meta";
    meta.textContent = `${group.rows.length} change point(s) | ${group.date ?? "no date"}`;
    header.appendChild(meta);
    section.appendChild(header);

    const table = document.createElement("table");
    table.innerHTML =
      "<thead><tr><th></th><th>test</th><th>task</th><th>date</th>" +
      "<th>hazard</th><th>state</th><th>tickets</th></tr></thead>";
    const body = document.createElement("tbody");
    for (const row of group.rows) {
      const tr = document.createElement("tr");
      tr.dataset.pointId = row.id;
      tr.className = `state-${row.state}`;

      const checkCell = document.createElement("td");
      const check = document.createElement("input");
      check.type = "checkbox";
      check.checked = selection.has(row.id);
      check.addEventListener("change", () => callbacks.onToggle(row.id, check.checked));
      checkCell.appendChild(check);
      tr.appendChild(checkCell);

      const testCell = document.createElement("td");
      const link = document.createElement("a");
      link.href = `#/trend/${row.seriesId}`;
      link.textContent = row.test;
      link.addEventListener("click", (event) => {
        event.preventDefault();
        callbacks.onTrendLink(row.seriesId);
      });
      testCell.appendChild(link);
      tr.appendChild(testCell);

      for (const text of [
        row.task,
        row.date ? row.date.slice(0, 16).replace("T", " ") : "-",
        formatHazard(row.hazard),
        row.state,
        row.ticketIds.join(", ") || "-",
      ]) {
        const td = document.createElement("td");
        td.textContent = text;
        tr.appendChild(td);
      }
      body.appendChild(tr);
    }
    table.appendChild(body);
    section.appendChild(table);
    container.appendChild(section);
  }
  return container;
}
