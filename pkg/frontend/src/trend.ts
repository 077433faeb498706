/** SVG rendering of a trend graph: value polyline, stable-region segments
 * colored by triage state, and diamond ticket markers. */

import { segmentClass, TrendGeometry } from "./model.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export function renderTrend(geometry: TrendGeometry, title: string): HTMLElement {
  const wrapper = document.createElement("div");
  wrapper.className = "trend-view";

  const heading = document.createElement("h2");
  heading.textContent = title;
  wrapper.appendChild(heading);

  if (geometry.points.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "no results for this series";
    wrapper.appendChild(empty);
    return wrapper;
  }

  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${geometry.width} ${geometry.height}`);
  svg.setAttribute("class", "trend-svg");

  for (const segment of geometry.segments) {
    const rect = document.createElementNS(SVG_NS, "rect");
    rect.setAttribute("x", String(segment.x0));
    rect.setAttribute("width", String(Math.max(segment.x1 - segment.x0, 1)));
    rect.setAttribute("y", "0");
    rect.setAttribute("height", String(geometry.height));
    rect.setAttribute("class", segmentClass(segment.state));
    rect.dataset.startOrder = String(segment.startOrder);
    rect.dataset.endOrder = String(segment.endOrder);
    svg.appendChild(rect);
  }

  const line = document.createElementNS(SVG_NS, "polyline");
  line.setAttribute("points", geometry.polyline);
  line.setAttribute("class", "trend-line");
  svg.appendChild(line);

  for (const marker of geometry.markers) {
    const diamond = document.createElementNS(SVG_NS, "path");
    const { x, y } = marker;
    diamond.setAttribute(
      "d",
      `M ${x} ${y - 7} L ${x + 7} ${y} L ${x} ${y + 7} L ${x - 7} ${y} Z`,
    );
    diamond.setAttribute("class", "ticket-marker");
    const tooltip = document.createElementNS(SVG_NS, "title");
    tooltip.textContent = `${marker.ticketId}: ${marker.summary} @ ${marker.revision}`;
    diamond.appendChild(tooltip);
    svg.appendChild(diamond);
  }

  wrapper.appendChild(svg);

  const legend = document.createElement("p");
  legend.className = "legend";
  legend.innerHTML =
    '<span class="chip unprocessed"></span> unprocessed ' +
    '<span class="chip acknowledged"></span> acknowledged ' +
    '<span class="chip hidden"></span> hidden ' +
    '<span class="chip diamond"></span> ticket';
  wrapper.appendChild(legend);
  return wrapper;
}
