import { describe, expect, it } from "vitest";

import { nodeLabel, renderGraph } from "../src/render.js";
import type { DiffSets, GraphDocument } from "../src/types.js";

const doc: GraphDocument = {
  version: 1,
  typeGraph: "pointer",
  nodes: [
    { id: 0, type: "Pointer", attrs: {} },
    { id: 1, type: "Address", attrs: { free: false } },
    { id: 2, type: "Int", attrs: { name: "s", val: 30 } },
  ],
  edges: [
    { id: 3, label: "ref", src: 0, tgt: 1 },
    { id: 4, label: "cont", src: 1, tgt: 2 },
  ],
};

describe("renderGraph", () => {
  it("emits one svg group per element", () => {
    const svg = renderGraph(doc);
    expect(svg).toContain('data-node-id="0"');
    expect(svg).toContain('data-node-id="2"');
    expect(svg).toContain('data-edge-id="3"');
    expect(svg.startsWith("<svg")).toBe(true);
  });

  it("is deterministic", () => {
    expect(renderGraph(doc)).toBe(renderGraph(doc));
  });

  it("marks created and updated elements", () => {
    const diff: DiffSets = {
      createdNodes: [2],
      createdEdges: [4],
      deletedNodes: [],
      deletedEdges: [],
      updatedNodes: [1],
    };
    const svg = renderGraph(doc, { diff });
    expect(svg).toMatch(/class="node kind-int created"/);
    expect(svg).toMatch(/class="node kind-address updated"/);
    expect(svg).toMatch(/class="edge created"/);
  });

  it("ghosts deleted elements using the previous state", () => {
    const previous: GraphDocument = {
      ...doc,
      nodes: [...doc.nodes, { id: 9, type: "Address", attrs: { free: true } }],
      edges: [...doc.edges, { id: 10, label: "succ", src: 1, tgt: 9 }],
    };
    const diff: DiffSets = {
      createdNodes: [],
      createdEdges: [],
      deletedNodes: [9],
      deletedEdges: [10],
      updatedNodes: [],
    };
    const svg = renderGraph(doc, { diff, previous });
    expect(svg).toMatch(/class="node ghost" data-node-id="9"/);
    expect(svg).toMatch(/class="edge ghost" data-edge-id="10"/);
  });

  it("highlights witness nodes", () => {
    const svg = renderGraph(doc, { witnesses: new Set([1]) });
    expect(svg).toMatch(/class="node kind-address witness"/);
  });

  it("escapes attribute text", () => {
    const nasty: GraphDocument = {
      version: 1,
      typeGraph: "pointer",
      nodes: [{ id: 0, type: "Int", attrs: { name: "<s>&", val: 1 } }],
      edges: [],
    };
    const svg = renderGraph(nasty);
    expect(svg).toContain("&lt;s&gt;&amp;");
    expect(svg).not.toContain("<s>&");
  });
});

describe("nodeLabel", () => {
  it("renders booleans like the simulator", () => {
    expect(nodeLabel({ id: 1, type: "Address", attrs: { free: true } })).toBe(
      "Address free=true",
    );
  });

  it("puts the variable name first and skips empty names", () => {
    expect(nodeLabel({ id: 1, type: "Int", attrs: { name: "s", val: 3 } })).toBe(
      "Int s val=3",
    );
    expect(nodeLabel({ id: 1, type: "Int", attrs: { name: "", val: 3 } })).toBe(
      "Int val=3",
    );
  });
});
