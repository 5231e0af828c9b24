/**
 * Pure layout for the model-history tree.
 *
 * Depth maps to the x axis, so refinement chains read left to right and
 * branches from one node stack vertically as siblings. Internal nodes sit
 * at the mean row of their children, which keeps edges short without a
 * full tidy-tree pass.
 */

export interface TreeNodeLite {
  id: number;
  parent: number | null;
  children: number[];
}

export interface PlacedNode {
  id: number;
  depth: number;
  row: number;
  x: number;
  y: number;
}

export interface PlacedEdge {
  parent: number;
  child: number;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export interface TreeLayout {
  nodes: PlacedNode[];
  edges: PlacedEdge[];
  width: number;
  height: number;
}

export interface TreeLayoutOptions {
  dx?: number;
  dy?: number;
  pad?: number;
}

export function layoutTree(
  nodes: TreeNodeLite[],
  options: TreeLayoutOptions = {},
): TreeLayout {
  const dx = options.dx ?? 90;
  const dy = options.dy ?? 46;
  const pad = options.pad ?? 28;

  const byId = new Map(nodes.map((n) => [n.id, n]));
  const placed = new Map<number, PlacedNode>();
  let nextRow = 0;

  const place = (id: number, depth: number): number => {
    const node = byId.get(id);
    if (!node) return nextRow;
    const children = node.children.filter((c) => byId.has(c));
    let row: number;
    if (children.length === 0) {
      row = nextRow++;
    } else {
      const rows = children.map((c) => place(c, depth + 1));
      row = rows.reduce((a, b) => a + b, 0) / rows.length;
    }
    placed.set(id, { id, depth, row, x: pad + depth * dx, y: pad + row * dy });
    return row;
  };

  const roots = nodes.filter((n) => n.parent === null || !byId.has(n.parent));
  for (const root of roots.sort((a, b) => a.id - b.id)) {
    place(root.id, 0);
  }

  const placedNodes = [...placed.values()].sort((a, b) => a.id - b.id);
  const edges: PlacedEdge[] = [];
  for (const node of nodes) {
    if (node.parent === null) continue;
    const from = placed.get(node.parent);
    const to = placed.get(node.id);
    if (!from || !to) continue;
    edges.push({
      parent: node.parent,
      child: node.id,
      x1: from.x,
      y1: from.y,
      x2: to.x,
      y2: to.y,
    });
  }

  const width = Math.max(...placedNodes.map((n) => n.x), 0) + pad;
  const height = Math.max(...placedNodes.map((n) => n.y), 0) + pad;
  return { nodes: placedNodes, edges, width, height };
}
