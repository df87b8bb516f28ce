// Pure SVG rendering of a memory graph plus one step's diff.
//
// Colour convention mirrors the simulator's exports: created/updated
// elements bold green, elements deleted by the shown step ghosted dashed
// blue (taken from the previous state's document), forbidden/witness
// elements dotted red. Being string-based keeps this fully testable
// without a DOM.

import { layoutGraph, type Layout } from "./layout.js";
import type { DiffSets, GraphDocument, GraphEdge, GraphNode } from "./types.js";

export interface RenderOptions {
  diff?: DiffSets | null;
  previous?: GraphDocument | null;
  witnesses?: Set<number>;
}

const ESCAPES: Record<string, string> = {
  "&": "&amp;",
  "<": "&lt;",
  ">": "&gt;",
  '"': "&quot;",
};

export function escapeXml(text: string): string {
  return text.replace(/[&<>"]/g, (c) => ESCAPES[c] ?? c);
}

export function nodeLabel(node: GraphNode): string {
  const parts: string[] = [];
  const name = node.attrs["name"];
  if (typeof name === "string" && name) parts.push(name);
  for (const key of Object.keys(node.attrs).sort()) {
    if (key === "name") continue;
    const value = node.attrs[key];
    parts.push(`${key}=${value === true ? "true" : value === false ? "false" : value}`);
  }
  return parts.length ? `${node.type} ${parts.join(" ")}` : node.type;
}

function nodeClasses(node: GraphNode, opts: RenderOptions): string {
  const classes = ["node", `kind-${node.type.toLowerCase()}`];
  if (opts.diff?.createdNodes.includes(node.id)) classes.push("created");
  if (opts.diff?.updatedNodes.includes(node.id)) classes.push("updated");
  if (opts.witnesses?.has(node.id)) classes.push("witness");
  return classes.join(" ");
}

function renderNode(node: GraphNode, layout: Layout, opts: RenderOptions): string {
  const pos = layout.positions.get(node.id);
  if (!pos) return "";
  const label = escapeXml(nodeLabel(node));
  const classes = nodeClasses(node, opts);
  const shape =
    node.type === "Pointer"
      ? `<ellipse cx="0" cy="0" rx="52" ry="20"/>`
      : node.type === "Address"
        ? `<rect x="-55" y="-20" width="110" height="40" rx="3"/>`
        : `<rect x="-58" y="-20" width="116" height="40" rx="12"/>`;
  return (
    `<g class="${classes}" data-node-id="${node.id}" transform="translate(${pos.x},${pos.y})">` +
    shape +
    `<text text-anchor="middle" dy="4">${label}</text>` +
    `</g>`
  );
}

function renderEdge(
  edge: GraphEdge,
  layout: Layout,
  className: string,
): string {
  const a = layout.positions.get(edge.src);
  const b = layout.positions.get(edge.tgt);
  if (!a || !b) return "";
  const midX = (a.x + b.x) / 2;
  const midY = (a.y + b.y) / 2 - 8;
  return (
    `<g class="${className}" data-edge-id="${edge.id}">` +
    `<line x1="${a.x}" y1="${a.y}" x2="${b.x}" y2="${b.y}" marker-end="url(#arrow)"/>` +
    `<text x="${midX}" y="${midY}" text-anchor="middle">${escapeXml(edge.label)}</text>` +
    `</g>`
  );
}

export function renderGraph(doc: GraphDocument, opts: RenderOptions = {}): string {
  const ghostsNodes: GraphNode[] = [];
  const ghostEdges: GraphEdge[] = [];
  if (opts.diff && opts.previous) {
    const deletedNodes = new Set(opts.diff.deletedNodes);
    const deletedEdges = new Set(opts.diff.deletedEdges);
    for (const n of opts.previous.nodes) if (deletedNodes.has(n.id)) ghostsNodes.push(n);
    for (const e of opts.previous.edges) if (deletedEdges.has(e.id)) ghostEdges.push(e);
  }

  // lay out the union so ghosts keep their old spot
  const unionDoc: GraphDocument = {
    ...doc,
    nodes: [...doc.nodes, ...ghostsNodes].sort((a, b) => a.id - b.id),
    edges: doc.edges,
  };
  const layout = layoutGraph(unionDoc);

  const pieces: string[] = [];
  pieces.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${layout.width} ${layout.height}" ` +
      `width="${layout.width}" height="${layout.height}" class="memory-graph">`,
  );
  pieces.push(
    `<defs><marker id="arrow" viewBox="0 0 10 10" refX="10" refY="5" ` +
      `markerWidth="7" markerHeight="7" orient="auto-start-reverse">` +
      `<path d="M 0 0 L 10 5 L 0 10 z"/></marker></defs>`,
  );
  for (const e of [...doc.edges].sort((a, b) => a.id - b.id)) {
    const created = opts.diff?.createdEdges.includes(e.id);
    pieces.push(renderEdge(e, layout, created ? "edge created" : "edge"));
  }
  for (const e of ghostEdges.sort((a, b) => a.id - b.id)) {
    pieces.push(renderEdge(e, layout, "edge ghost"));
  }
  for (const n of [...doc.nodes].sort((a, b) => a.id - b.id)) {
    pieces.push(renderNode(n, layout, opts));
  }
  for (const n of ghostsNodes.sort((a, b) => a.id - b.id)) {
    const pos = layout.positions.get(n.id);
    if (!pos) continue;
    pieces.push(
      `<g class="node ghost" data-node-id="${n.id}" transform="translate(${pos.x},${pos.y})">` +
        `<rect x="-55" y="-20" width="110" height="40" rx="3"/>` +
        `<text text-anchor="middle" dy="4">${escapeXml(nodeLabel(n))}</text></g>`,
    );
  }
  pieces.push("</svg>");
  return pieces.join("\n");
}
