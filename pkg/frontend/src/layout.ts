// Diagram geometry. Participants become vertical lanes, body elements
// become rows in document order, fragments become nested boxes spanning
// the lanes, and every node gets one anchor point for overlay arrows.
// Pure data in, pure data out; rendering happens elsewhere.

import type { WireElement, WireUseCase } from "./types.js";

export const LANE_X0 = 250;
export const LANE_GAP = 180;
export const TOP_Y = 110;
export const ROW_H = 56;
export const HEADER_H = 34;
export const FRAG_INSET = 14;

export interface Point {
  x: number;
  y: number;
}

export interface LaneLayout {
  name: string;
  x: number;
}

export interface InputChip {
  x: number;
  y: number;
  width: number;
  height: number;
  fields: string[];
}

export interface MessageLayout {
  shape: "message";
  id: string;
  row: number;
  y: number;
  x1: number;
  x2: number;
  label: string;
  tables: string[];
}

export interface ReturnLayout {
  shape: "return";
  id: string;
  row: number;
  y: number;
  x1: number;
  x2: number;
  label: string;
}

export type ArrowLayout = MessageLayout | ReturnLayout;

export interface BranchDivider {
  label: string;
  y: number;
}

export interface FragmentLayout {
  id: string;
  kind: string;
  depth: number;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  headerY: number;
  dividers: BranchDivider[];
  tables: string[];
}

export interface DiagramLayout {
  width: number;
  height: number;
  usecase: string;
  lanes: LaneLayout[];
  input: InputChip;
  arrows: ArrowLayout[];
  fragments: FragmentLayout[];
  anchors: Record<string, Point>;
}

const rowY = (row: number): number => TOP_Y + row * ROW_H;

export function layoutDiagram(usecase: WireUseCase): DiagramLayout {
  const lanes: LaneLayout[] = usecase.participants.map((name, i) => ({
    name,
    x: LANE_X0 + i * LANE_GAP,
  }));
  const laneX = new Map(lanes.map((l) => [l.name, l.x]));
  const rightEdge = (lanes.length ? lanes[lanes.length - 1].x : LANE_X0) + 90;

  const input: InputChip = {
    x: 24,
    y: 30,
    width: 150,
    height: 44,
    fields: usecase.input_fields.map((f) => f.name),
  };

  const arrows: ArrowLayout[] = [];
  const fragments: FragmentLayout[] = [];
  const anchors: Record<string, Point> = {
    "@input": { x: input.x + input.width / 2, y: input.y + input.height },
  };

  let nextRow = 0;

  const walk = (elements: WireElement[], depth: number): void => {
    for (const element of elements) {
      if (element.type === "message") {
        const row = nextRow++;
        const y = rowY(row);
        const x1 = laneX.get(element.sender) ?? LANE_X0;
        const x2 = laneX.get(element.receiver) ?? LANE_X0;
        arrows.push({
          shape: "message",
          id: element.id,
          row,
          y,
          x1,
          x2,
          label: `${element.id}: ${element.api}`,
          tables: element.tables,
        });
        anchors[element.id] = { x: (x1 + x2) / 2, y };
      } else if (element.type === "return") {
        const row = nextRow++;
        const y = rowY(row);
        const x1 = lanes.length ? lanes[0].x : LANE_X0;
        const x2 = input.x + input.width;
        const fields = element.fields.map((f) => f.name).join(", ");
        arrows.push({
          shape: "return",
          id: element.id,
          row,
          y,
          x1,
          x2,
          label: fields ? `${element.id} { ${fields} }` : element.id,
        });
        anchors[element.id] = { x: (x1 + x2) / 2, y };
      } else {
        const headerRow = nextRow++;
        const headerY = rowY(headerRow);
        const dividers: BranchDivider[] = [];
        element.branches.forEach((branch, i) => {
          if (i > 0) {
            dividers.push({ label: branch.label, y: rowY(nextRow++) - ROW_H / 2 });
          }
          walk(branch.elements, depth + 1);
        });
        const lastRow = nextRow - 1;
        const inset = FRAG_INSET * depth;
        const fragment: FragmentLayout = {
          id: element.id,
          kind: element.kind,
          depth,
          x1: input.x + input.width + 30 + inset,
          y1: headerY - HEADER_H / 2,
          x2: rightEdge - inset,
          y2: rowY(lastRow) + ROW_H / 2,
          headerY,
          dividers,
          tables: element.tables,
        };
        fragments.push(fragment);
        anchors[element.id] = { x: fragment.x1, y: headerY };
      }
    }
  };
  walk(usecase.body, 0);

  return {
    width: rightEdge + 40,
    height: rowY(Math.max(nextRow - 1, 0)) + ROW_H,
    usecase: usecase.name,
    lanes,
    input,
    arrows,
    fragments,
    anchors,
  };
}
