// Wire types for the notebook service protocol (see ../../docs/protocol.md).

export interface CellDoc {
  id: string;
  source: string;
}

export interface WindowDoc {
  id: string;
  label: string;
  cells: CellDoc[];
}

export interface StageDoc {
  id: string;
  alternatives: WindowDoc[];
}

export interface NotebookDoc {
  version: number;
  title: string;
  stages: StageDoc[];
  [extra: string]: unknown;
}

export interface ErrorInfo {
  kind: string;
  message: string;
  line: number;
  col: number;
}

// One result per upstream combination; `combination` is the service label
// ("s1=0;s3=1", "" for the single lineage of a linear notebook).
export interface OutputEntry {
  combination: string;
  items: string[];
  error: ErrorInfo | null;
  inherited: boolean;
}

export type CellStatus =
  | "queued"
  | "running"
  | "ok"
  | "error"
  | "skipped"
  | "stale";

export interface ExecView {
  statuses: Record<string, Record<string, string>>;
  outputs: Record<string, OutputEntry[]>;
}

export interface Rect {
  x: number;
  y: number;
  width: number;
  height: number;
  column: number;
}

export interface Pose {
  x: number;
  y: number;
}

export interface LayoutView {
  desktop: Record<string, Rect>;
  overrides: Record<string, Pose>;
}

export interface Snapshot {
  server_seq: number;
  notebook_id: string;
  notebook: NotebookDoc;
  exec: ExecView;
  layout: LayoutView;
}

export type Delta =
  | {
      server_seq: number;
      change: "notebook_changed";
      notebook: NotebookDoc;
      reset_exec: boolean;
    }
  | {
      server_seq: number;
      change: "status_changed";
      cell_id: string;
      combination_label: string;
      status: string;
    }
  | {
      server_seq: number;
      change: "output_added";
      window_id: string;
      entry: OutputEntry;
    }
  | {
      server_seq: number;
      change: "layout_changed";
      window_id: string;
      rect?: Rect | null;
      pose?: Pose;
    };

export type Command =
  | { op: "edit_cell"; cell_id: string; source: string }
  | { op: "branch"; window_id: string }
  | { op: "extract"; window_id: string; cell_ids: string[] }
  | {
      op: "relocate";
      cell_id: string;
      target_window_id: string;
      target_index: number;
    }
  | { op: "delete_cells"; cell_ids: string[] }
  | { op: "delete_window"; window_id: string }
  | { op: "run_from"; cell_id: string }
  | { op: "execute_all" }
  | { op: "move_window"; window_id: string; x: number; y: number };

export interface Ack {
  server_seq: number;
  client_seq: number;
  result?: Record<string, unknown>;
  duplicate?: boolean;
}

export interface Rejection {
  error: string;
  message: string;
}

export interface TelemetryEvent {
  t_ms: number;
  kind: string;
  payload: Record<string, unknown>;
}
