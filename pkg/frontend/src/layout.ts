// Deterministic layered layout for memory graphs.
//
// Columns by kind: arrays, pointers, addresses (ordered along their succ
// chains), objects. All ties break on node id, so consecutive frames stay
// visually stable.

import type { GraphDocument, GraphNode } from "./types.js";

export interface Position {
  x: number;
  y: number;
}

export interface Layout {
  positions: Map<number, Position>;
  width: number;
  height: number;
}

export const COLUMN_X: Record<string, number> = {
  Array: 70,
  Pointer: 230,
  Address: 420,
  Int: 620,
  Char: 620,
  Object: 620,
};

const ROW_H = 74;
const TOP = 60;

function byId(a: GraphNode, b: GraphNode): number {
  return a.id - b.id;
}

export function layoutGraph(doc: GraphDocument): Layout {
  const positions = new Map<number, Position>();
  const nodes = new Map(doc.nodes.map((n) => [n.id, n]));

  const addresses = doc.nodes.filter((n) => n.type === "Address").sort(byId);
  const succNext = new Map<number, number>();
  const succPrev = new Map<number, number>();
  for (const e of doc.edges) {
    if (e.label !== "succ") continue;
    if (!succNext.has(e.src) && !succPrev.has(e.tgt)) {
      succNext.set(e.src, e.tgt);
      succPrev.set(e.tgt, e.src);
    }
  }

  // address rows follow the succ chains, chains stacked by head id
  const heads = addresses.filter((a) => !succPrev.has(a.id));
  let row = 0;
  const addressRow = new Map<number, number>();
  for (const head of heads) {
    let cursor: number | undefined = head.id;
    const seen = new Set<number>();
    while (cursor !== undefined && !seen.has(cursor)) {
      seen.add(cursor);
      addressRow.set(cursor, row);
      row += 1;
      cursor = succNext.get(cursor);
    }
    row += 0.35; // gap between chains
  }
  for (const a of addresses) {
    if (!addressRow.has(a.id)) {
      addressRow.set(a.id, row);
      row += 1;
    }
  }
  for (const a of addresses) {
    positions.set(a.id, {
      x: COLUMN_X.Address!,
      y: TOP + addressRow.get(a.id)! * ROW_H,
    });
  }

  // objects sit next to the address containing them, leftovers stack below
  const contOf = new Map<number, number>();
  for (const e of doc.edges) {
    if (e.label === "cont" && !contOf.has(e.tgt)) contOf.set(e.tgt, e.src);
  }
  const objects = doc.nodes
    .filter((n) => n.type !== "Address" && n.type !== "Pointer" && n.type !== "Array")
    .sort(byId);
  let freeObjRow = row;
  for (const o of objects) {
    const holder = contOf.get(o.id);
    const y =
      holder !== undefined && positions.has(holder)
        ? positions.get(holder)!.y
        : TOP + (freeObjRow++) * ROW_H;
    positions.set(o.id, { x: COLUMN_X.Object!, y });
  }

  // pointers align with their referenced address where possible
  const refOf = new Map<number, number>();
  for (const e of doc.edges) {
    if (e.label === "ref" && !refOf.has(e.src)) refOf.set(e.src, e.tgt);
  }
  const pointers = doc.nodes.filter((n) => n.type === "Pointer").sort(byId);
  const usedRows = new Set<number>();
  let nullRow = 0;
  for (const p of pointers) {
    const target = refOf.get(p.id);
    let y: number;
    if (target !== undefined && positions.has(target)) {
      y = positions.get(target)!.y;
      while (usedRows.has(y)) y += ROW_H * 0.45;
    } else {
      y = TOP + (row + nullRow) * ROW_H;
      nullRow += 1;
    }
    usedRows.add(y);
    positions.set(p.id, { x: COLUMN_X.Pointer!, y });
  }

  // arrays align with their fst pointer
  const fstOf = new Map<number, number>();
  for (const e of doc.edges) {
    if (e.label === "fst" && !fstOf.has(e.src)) fstOf.set(e.src, e.tgt);
  }
  const arrays = doc.nodes.filter((n) => n.type === "Array").sort(byId);
  let arrayRow = 0;
  for (const a of arrays) {
    const ptr = fstOf.get(a.id);
    const y =
      ptr !== undefined && positions.has(ptr)
        ? positions.get(ptr)!.y
        : TOP + (arrayRow++) * ROW_H;
    positions.set(a.id, { x: COLUMN_X.Array!, y });
  }

  // anything untyped-for-layout (defensive) stacks in the object column
  for (const n of doc.nodes) {
    if (!positions.has(n.id)) {
      positions.set(n.id, { x: COLUMN_X.Object!, y: TOP + (freeObjRow++) * ROW_H });
    }
  }

  let maxY = TOP;
  for (const p of positions.values()) maxY = Math.max(maxY, p.y);
  return { positions, width: 760, height: maxY + ROW_H };
}
