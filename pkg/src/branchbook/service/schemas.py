"""Wire schemas for the command endpoint.

Commands mirror the structural and execution operations; the discriminated
union rejects unknown ops whole. client_seq makes retries idempotent.
"""
from __future__ import annotations

from typing import Annotated, Literal, Union

from pydantic import BaseModel, Field


class _Cmd(BaseModel):
    client_seq: int


class EditCellCmd(_Cmd):
    op: Literal["edit_cell"]
    cell_id: str
    source: str


class BranchCmd(_Cmd):
    op: Literal["branch"]
    window_id: str


class ExtractCmd(_Cmd):
    op: Literal["extract"]
    window_id: str
    cell_ids: list[str]


class RelocateCmd(_Cmd):
    op: Literal["relocate"]
    cell_id: str
    target_window_id: str
    target_index: int


class DeleteCellsCmd(_Cmd):
    op: Literal["delete_cells"]
    cell_ids: list[str]


class DeleteWindowCmd(_Cmd):
    op: Literal["delete_window"]
    window_id: str


class RunFromCmd(_Cmd):
    op: Literal["run_from"]
    cell_id: str


class ExecuteAllCmd(_Cmd):
    op: Literal["execute_all"]


class MoveWindowCmd(_Cmd):
    op: Literal["move_window"]
    window_id: str
    x: float
    y: float


Command = Annotated[
    Union[
        EditCellCmd,
        BranchCmd,
        ExtractCmd,
        RelocateCmd,
        DeleteCellsCmd,
        DeleteWindowCmd,
        RunFromCmd,
        ExecuteAllCmd,
        MoveWindowCmd,
    ],
    Field(discriminator="op"),
]


class TelemetryBatch(BaseModel):
    events: list[dict]
