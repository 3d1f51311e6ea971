"""Request/response models for the verification service.

All payloads carry file contents as text, so the service stays stateless and
the CLI can run against a remote server or fully in process.
"""
from __future__ import annotations

from pydantic import BaseModel, Field


class ConditionVerdict(BaseModel):
    condition: str
    passed: bool
    witness: str | None = None


class CheckGwfRequest(BaseModel):
    net: str
    name: str = "net"


class CheckGwfResponse(BaseModel):
    ok: bool
    report: str
    m0: list[str] = []
    mf: list[str] = []
    clause: int | None = None
    node: str | None = None


class CheckSoundnessRequest(BaseModel):
    net: str
    name: str = "net"
    cap: int = Field(default=1_000_000, ge=1)


class CheckSoundnessResponse(BaseModel):
    ok: bool
    report: str
    violated: str
    witness: str | None = None
    trace: list[str] | None = None
    states: int = 0


class CheckMorphismRequest(BaseModel):
    source_net: str
    target_net: str
    map_text: str
    name: str = "map"


class CheckMorphismResponse(BaseModel):
    ok: bool
    report: str
    conditions: list[ConditionVerdict] = []


class ComposeRequest(BaseModel):
    net1: str
    net2: str
    chan: str
    name1: str = "net1"
    name2: str = "net2"
    chan_name: str = "channels"


class ComposeResponse(BaseModel):
    ok: bool
    report: str
    net: str


class RefineRequest(BaseModel):
    composed: str
    source_net: str
    target_net: str
    map_text: str
    name: str = "map"
    composed_name: str = "composed"


class RefineResponse(BaseModel):
    ok: bool
    report: str
    net: str
    conditions: list[ConditionVerdict] = []


class ProjectRequest(BaseModel):
    log: str
    fmt: str = "csv"
    out_fmt: str | None = None
    alphabet: list[str]
    name: str = "log"


class ProjectResponse(BaseModel):
    ok: bool
    log: str
    dropped: int
    traces: int


class DiscoverRequest(BaseModel):
    log: str
    fmt: str = "csv"
    name: str = "log"


class DiscoverResponse(BaseModel):
    ok: bool
    tree: str
    net: str


class QualityRequest(BaseModel):
    net: str
    log: str
    fmt: str = "csv"
    net_name: str = "net"
    log_name: str = "log"


class QualityResponse(BaseModel):
    ok: bool
    report: str
    fitness: float | None = None
    fitness_exact: str | None = None
    precision: float | None = None
    precision_exact: str | None = None


class PlayoutRequest(BaseModel):
    net: str
    name: str = "net"
    traces: int = Field(ge=1)
    seed: int
    max_steps: int | None = None
    unsound_ok: bool = False
    out_fmt: str = "csv"


class PlayoutResponse(BaseModel):
    ok: bool
    log: str
    regenerated: int


class PipelineRequest(BaseModel):
    log: str
    fmt: str = "csv"
    partition: str
    abstract1: str
    abstract2: str
    chan: str
    log_name: str = "log"
    partition_name: str = "partition"
    abstract1_name: str = "abstract1"
    abstract2_name: str = "abstract2"
    chan_name: str = "channels"


class PipelineResponse(BaseModel):
    ok: bool
    report: str
    table: str
    net: str | None = None
    direct_fitness: float | None = None
    direct_precision: float | None = None
    composed_fitness: float | None = None
    composed_precision: float | None = None
