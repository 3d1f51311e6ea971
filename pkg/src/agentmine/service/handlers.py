"""Service operations: pure functions from request models to response models.

The FastAPI routes and the CLI both call these, so behavior is identical in
process and over HTTP.  Malformed inputs raise (the caller maps them to 400
or exit code 2); property verdicts come back as ok=False responses.
"""
from __future__ import annotations

from ..compose import (
    composed_from_document,
    composed_to_document,
    channel_compose,
    parse_chan,
    refine_in_composition,
)
from ..conformance import escaping_edges_precision, token_replay_fitness
from ..discover import discover_wfnet
from ..errors import (
    BudgetExceeded,
    ComponentMismatch,
    DuplicateLabel,
    EmptyLog,
    InvalidChannelSpec,
    InvalidMarking,
    InvalidPartition,
    MapDerivationError,
    MapShapeError,
    NetStructureError,
    NotGwf,
    NotSmdSafe,
    ParseError,
    SoundnessContradiction,
    UnknownNode,
)
from ..gwf import GwfNet, check_soundness, recognize_gwf
from ..logs import format_log, parse_log, project
from ..morphisms import check_alpha, parse_amap
from ..netfile import NetDocument, format_pnet, parse_pnet
from ..pipeline import parse_partition_file, run_pipeline
from ..simulate import playout
from . import models as m

# Errors that mean the request itself is unusable (HTTP 400 / exit code 2);
# everything else AgentMineError-shaped is a property verdict (exit code 1).
INPUT_ERRORS = (
    ParseError,
    EmptyLog,
    UnknownNode,
    InvalidMarking,
    NetStructureError,
    InvalidChannelSpec,
    InvalidPartition,
    MapShapeError,
    ComponentMismatch,
    DuplicateLabel,
)


def _gwf_from_text(text: str, name: str) -> GwfNet:
    doc = parse_pnet(text, source=name)
    declared_m0 = doc.m0 if doc.init else None
    declared_mf = doc.mf if doc.final else None
    return recognize_gwf(doc.net, declared_m0, declared_mf)


def _gwf_to_text(g: GwfNet) -> str:
    return format_pnet(NetDocument(g.net, g.m0.support, g.mf.support))


def check_gwf(req: m.CheckGwfRequest) -> m.CheckGwfResponse:
    try:
        g = _gwf_from_text(req.net, req.name)
    except NotGwf as exc:
        report = f"gwf: no\nviolated: {exc.clause}\nnode: {exc.node}\n"
        return m.CheckGwfResponse(
            ok=False, report=report, clause=exc.clause, node=exc.node
        )
    m0 = sorted(g.m0.support)
    mf = sorted(g.mf.support)
    report = f"gwf: yes\nm0: {{{', '.join(m0)}}}\nmf: {{{', '.join(mf)}}}\n"
    return m.CheckGwfResponse(ok=True, report=report, m0=m0, mf=mf)


def soundness(req: m.CheckSoundnessRequest) -> m.CheckSoundnessResponse:
    try:
        g = _gwf_from_text(req.net, req.name)
    except NotGwf as exc:
        report = f"sound: no\nviolated: not-gwf\nwitness: {exc.node}\n"
        return m.CheckSoundnessResponse(
            ok=False, report=report, violated="not-gwf", witness=exc.node
        )
    rep = check_soundness(g, cap=req.cap)
    return m.CheckSoundnessResponse(
        ok=rep.sound,
        report=rep.render(),
        violated=rep.violated,
        witness=rep.witness,
        trace=list(rep.witness_trace) if rep.witness_trace is not None else None,
        states=rep.states,
    )


def _marked_from_text(text: str, name: str):
    doc = parse_pnet(text, source=name)
    from ..nets import MarkedNet

    return MarkedNet(doc.net, doc.m0)


def morphism(req: m.CheckMorphismRequest) -> m.CheckMorphismResponse:
    amap = parse_amap(req.map_text, source=req.name)
    source = _marked_from_text(req.source_net, amap.source_ref)
    target = _marked_from_text(req.target_net, amap.target_ref)
    try:
        phi = check_alpha(source, target, amap.mapping)
    except (NotSmdSafe, BudgetExceeded) as exc:
        return m.CheckMorphismResponse(
            ok=False, report=f"certified: no\nerror: {exc}\n"
        )
    conditions = [
        m.ConditionVerdict(condition=r.condition, passed=r.passed, witness=r.witness)
        for r in phi.certificate
    ]
    return m.CheckMorphismResponse(
        ok=phi.certified, report=phi.render_certificate(), conditions=conditions
    )


def compose(req: m.ComposeRequest) -> m.ComposeResponse:
    spec = parse_chan(req.chan, source=req.chan_name)
    try:
        n1 = _gwf_from_text(req.net1, req.name1)
        n2 = _gwf_from_text(req.net2, req.name2)
    except NotGwf as exc:
        return m.ComposeResponse(
            ok=False, report=f"compose: failed\nreason: component is not a workflow net: {exc}\n", net=""
        )
    composed = channel_compose(n1, n2, spec)
    text = format_pnet(composed_to_document(composed))
    report = (
        f"compose: ok\nplaces: {len(composed.gwf.net.places)}\n"
        f"transitions: {len(composed.gwf.net.transitions)}\n"
        f"channels: {len(composed.channels)}\n"
    )
    return m.ComposeResponse(ok=True, report=report, net=text)


def refine(req: m.RefineRequest) -> m.RefineResponse:
    amap = parse_amap(req.map_text, source=req.name)
    composed_doc = parse_pnet(req.composed, source=req.composed_name)
    abstract = composed_from_document(composed_doc)
    source = _marked_from_text(req.source_net, amap.source_ref)
    target = _marked_from_text(req.target_net, amap.target_ref)
    try:
        phi = check_alpha(source, target, amap.mapping)
    except (NotSmdSafe, BudgetExceeded) as exc:
        return m.RefineResponse(ok=False, report=f"refine: failed\nreason: {exc}\n", net="")
    if not phi.certified:
        return m.RefineResponse(
            ok=False,
            report="refine: failed\nreason: refinement map is not certified\n"
            + phi.render_certificate(),
            net="",
            conditions=[
                m.ConditionVerdict(condition=r.condition, passed=r.passed, witness=r.witness)
                for r in phi.certificate
            ],
        )
    try:
        result, lifted = refine_in_composition(abstract, phi)
    except (NotGwf, NotSmdSafe, BudgetExceeded) as exc:
        return m.RefineResponse(ok=False, report=f"refine: failed\nreason: {exc}\n", net="")
    text = format_pnet(composed_to_document(result))
    report = "refine: ok\n" + lifted.render_certificate()
    return m.RefineResponse(
        ok=lifted.certified,
        report=report,
        net=text,
        conditions=[
            m.ConditionVerdict(condition=r.condition, passed=r.passed, witness=r.witness)
            for r in lifted.certificate
        ],
    )


def project_log(req: m.ProjectRequest) -> m.ProjectResponse:
    log = parse_log(req.log, req.fmt, source=req.name)
    projected, dropped = project(log, req.alphabet)
    out_fmt = req.out_fmt or req.fmt
    return m.ProjectResponse(
        ok=True,
        log=format_log(projected, out_fmt),
        dropped=dropped,
        traces=len(projected),
    )


def discover(req: m.DiscoverRequest) -> m.DiscoverResponse:
    log = parse_log(req.log, req.fmt, source=req.name)
    tree, net = discover_wfnet(log)
    return m.DiscoverResponse(ok=True, tree=tree.render(), net=_gwf_to_text(net))


def replay(req: m.QualityRequest) -> m.QualityResponse:
    log = parse_log(req.log, req.fmt, source=req.log_name)
    try:
        g = _gwf_from_text(req.net, req.net_name)
    except NotGwf as exc:
        return m.QualityResponse(ok=False, report=f"replay: failed\nreason: {exc}\n")
    rep = token_replay_fitness(g, log)
    return m.QualityResponse(
        ok=True,
        report=rep.render(),
        fitness=float(rep.fitness),
        fitness_exact=str(rep.fitness),
    )


def precision(req: m.QualityRequest) -> m.QualityResponse:
    log = parse_log(req.log, req.fmt, source=req.log_name)
    try:
        g = _gwf_from_text(req.net, req.net_name)
    except NotGwf as exc:
        return m.QualityResponse(ok=False, report=f"precision: failed\nreason: {exc}\n")
    rep = escaping_edges_precision(g, log)
    return m.QualityResponse(
        ok=True,
        report=rep.render(),
        precision=float(rep.precision),
        precision_exact=str(rep.precision),
    )


def playout_log(req: m.PlayoutRequest) -> m.PlayoutResponse:
    try:
        g = _gwf_from_text(req.net, req.name)
        result = playout(
            g,
            req.traces,
            req.seed,
            max_steps=req.max_steps,
            allow_unsound=req.unsound_ok,
        )
    except (NotGwf, SoundnessContradiction) as exc:
        return m.PlayoutResponse(ok=False, log=f"# playout failed: {exc}", regenerated=0)
    return m.PlayoutResponse(
        ok=True, log=format_log(result.log, req.out_fmt), regenerated=result.regenerated
    )


def pipeline(req: m.PipelineRequest) -> m.PipelineResponse:
    log = parse_log(req.log, req.fmt, source=req.log_name)
    part_doc = parse_partition_file(req.partition, source=req.partition_name)
    spec = parse_chan(req.chan, source=req.chan_name)
    try:
        abstract1 = _gwf_from_text(req.abstract1, req.abstract1_name)
        abstract2 = _gwf_from_text(req.abstract2, req.abstract2_name)
        result = run_pipeline(
            log,
            part_doc.partition,
            abstract1,
            abstract2,
            spec,
            map1=part_doc.map1,
            map2=part_doc.map2,
        )
    except (NotGwf, NotSmdSafe, BudgetExceeded, MapDerivationError, SoundnessContradiction) as exc:
        return m.PipelineResponse(
            ok=False, report=f"pipeline: failed\nfailure: {exc}\n", table="", net=None
        )
    net_text = (
        format_pnet(composed_to_document(result.composed)) if result.composed else None
    )
    resp = m.PipelineResponse(
        ok=result.ok,
        report=result.render(),
        table=result.comparison_table(),
        net=net_text,
    )
    if result.direct_quality is not None:
        resp.direct_fitness = float(result.direct_quality.fitness)
        resp.direct_precision = float(result.direct_quality.precision)
    if result.composed_quality is not None:
        resp.composed_fitness = float(result.composed_quality.fitness)
        resp.composed_precision = float(result.composed_quality.precision)
    return resp
