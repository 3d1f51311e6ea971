"""Command-line front end.

Every command marshals file contents into a service request and prints the
response; the work happens in the service handlers.  By default the service
runs in process, `--server URL` sends the same requests over HTTP instead.

Exit codes: 0 ok, 1 property violation (unsound net, failed certificate,
precision below expectations never counts), 2 usage or parse error.
"""
from __future__ import annotations

import os
import sys

import click
import httpx

from .errors import AgentMineError
from .logs import detect_format
from .service import handlers
from .service import models as m

ROUTES = {
    "check/gwf": (handlers.check_gwf, m.CheckGwfResponse),
    "check/soundness": (handlers.soundness, m.CheckSoundnessResponse),
    "check/morphism": (handlers.morphism, m.CheckMorphismResponse),
    "compose": (handlers.compose, m.ComposeResponse),
    "refine": (handlers.refine, m.RefineResponse),
    "project": (handlers.project_log, m.ProjectResponse),
    "discover": (handlers.discover, m.DiscoverResponse),
    "replay": (handlers.replay, m.QualityResponse),
    "precision": (handlers.precision, m.QualityResponse),
    "playout": (handlers.playout_log, m.PlayoutResponse),
    "pipeline": (handlers.pipeline, m.PipelineResponse),
}


class Client:
    def __init__(self, server: str | None):
        self.server = server.rstrip("/") if server else None

    def call(self, route: str, request):
        handler, response_model = ROUTES[route]
        if self.server is None:
            try:
                return handler(request)
            except handlers.INPUT_ERRORS as exc:
                fail(str(exc))
            except AgentMineError as exc:
                click.echo(str(exc), err=True)
                sys.exit(1)
        resp = httpx.post(f"{self.server}/{route}", json=request.model_dump(), timeout=300.0)
        if resp.status_code == 400:
            fail(resp.json().get("detail", resp.text))
        if resp.status_code == 422:
            click.echo(resp.json().get("detail", resp.text), err=True)
            sys.exit(1)
        if resp.status_code != 200:
            fail(f"server error {resp.status_code}: {resp.text}")
        return response_model.model_validate(resp.json())


def fail(message: str):
    click.echo(message, err=True)
    sys.exit(2)


def read_file(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        fail(f"{path}: {exc.strerror}")


def write_file(path: str, content: str):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(content)


def finish(report: str, ok: bool):
    click.echo(report, nl=False)
    sys.exit(0 if ok else 1)


def emit_artifact(artifact: str | None, output: str | None, report: str, ok: bool):
    """Write the artifact to `output`, or to stdout with the report moved to
    stderr so stdout stays machine-readable."""
    if artifact is not None and output:
        write_file(output, artifact)
        finish(report, ok)
    if artifact is not None:
        click.echo(artifact, nl=False)
        click.echo(report, nl=False, err=True)
        sys.exit(0 if ok else 1)
    finish(report, ok)


@click.group()
@click.option("--server", default=None, envvar="AGENTMINE_SERVER",
              help="Base URL of a running service; defaults to in-process execution.")
@click.pass_context
def main(ctx, server):
    """Discover, compose and verify multi-agent workflow nets."""
    ctx.obj = Client(server)


@main.group()
def check():
    """Structural and behavioral checks."""


@check.command("gwf")
@click.argument("net", type=click.Path())
@click.pass_obj
def check_gwf(client, net):
    """Verify the workflow-net clauses of NET."""
    resp = client.call("check/gwf", m.CheckGwfRequest(net=read_file(net), name=net))
    finish(resp.report, resp.ok)


@check.command("soundness")
@click.argument("net", type=click.Path())
@click.option("--cap", default=1_000_000, show_default=True, help="State-count cap.")
@click.pass_obj
def check_soundness_cmd(client, net, cap):
    """Check soundness of NET."""
    resp = client.call(
        "check/soundness", m.CheckSoundnessRequest(net=read_file(net), name=net, cap=cap)
    )
    finish(resp.report, resp.ok)


@check.command("morphism")
@click.argument("amap", type=click.Path())
@click.pass_obj
def check_morphism_cmd(client, amap):
    """Certify the refinement map described by AMAP."""
    map_text, source_text, target_text = _load_amap_bundle(amap)
    resp = client.call(
        "check/morphism",
        m.CheckMorphismRequest(
            source_net=source_text, target_net=target_text, map_text=map_text, name=amap
        ),
    )
    finish(resp.report, resp.ok)


def _load_amap_bundle(amap_path: str) -> tuple[str, str, str]:
    from .morphisms import parse_amap

    map_text = read_file(amap_path)
    try:
        doc = parse_amap(map_text, source=amap_path)
    except AgentMineError as exc:
        fail(str(exc))
    base = os.path.dirname(os.path.abspath(amap_path))
    source_text = read_file(os.path.join(base, doc.source_ref))
    target_text = read_file(os.path.join(base, doc.target_ref))
    return map_text, source_text, target_text


@main.command()
@click.argument("net1", type=click.Path())
@click.argument("net2", type=click.Path())
@click.argument("chan", type=click.Path())
@click.option("-o", "--output", type=click.Path(), default=None, help="Write the composition here.")
@click.pass_obj
def compose(client, net1, net2, chan, output):
    """Compose NET1 and NET2 over the channels in CHAN."""
    resp = client.call(
        "compose",
        m.ComposeRequest(
            net1=read_file(net1), net2=read_file(net2), chan=read_file(chan),
            name1=net1, name2=net2, chan_name=chan,
        ),
    )
    emit_artifact(resp.net if resp.ok else None, output, resp.report, resp.ok)


@main.command()
@click.argument("composed", type=click.Path())
@click.argument("amap", type=click.Path())
@click.option("-o", "--output", type=click.Path(), default=None)
@click.pass_obj
def refine(client, composed, amap, output):
    """Replace one component of COMPOSED by the refinement in AMAP."""
    map_text, source_text, target_text = _load_amap_bundle(amap)
    resp = client.call(
        "refine",
        m.RefineRequest(
            composed=read_file(composed),
            source_net=source_text,
            target_net=target_text,
            map_text=map_text,
            name=amap,
            composed_name=composed,
        ),
    )
    emit_artifact(resp.net if resp.ok else None, output, resp.report, resp.ok)


@main.command()
@click.argument("log", type=click.Path())
@click.option("--alphabet", required=True, help="Comma-separated activity names to keep.")
@click.option("-o", "--output", type=click.Path(), default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "xes"]), default=None,
              help="Log format (default: by file extension).")
@click.pass_obj
def project(client, log, alphabet, output, fmt):
    """Project LOG onto an activity alphabet."""
    fmt = fmt or detect_format(log)
    resp = client.call(
        "project",
        m.ProjectRequest(
            log=read_file(log),
            fmt=fmt,
            out_fmt=detect_format(output) if output else fmt,
            alphabet=[a for a in alphabet.split(",") if a],
            name=log,
        ),
    )
    if resp.dropped:
        click.echo(f"warning: dropped {resp.dropped} empty traces", err=True)
    if output:
        write_file(output, resp.log)
    else:
        click.echo(resp.log, nl=False)
    sys.exit(0)


@main.command()
@click.argument("log", type=click.Path())
@click.option("-o", "--output", type=click.Path(), default=None, help="Write the net here.")
@click.option("--tree", "show_tree", is_flag=True, help="Print the process tree as well.")
@click.option("--format", "fmt", type=click.Choice(["csv", "xes"]), default=None)
@click.pass_obj
def discover(client, log, output, show_tree, fmt):
    """Discover a workflow net from LOG."""
    resp = client.call(
        "discover", m.DiscoverRequest(log=read_file(log), fmt=fmt or detect_format(log), name=log)
    )
    if show_tree:
        click.echo(resp.tree)
    if output:
        write_file(output, resp.net)
    else:
        click.echo(resp.net, nl=False)
    sys.exit(0)


@main.command()
@click.argument("net", type=click.Path())
@click.argument("log", type=click.Path())
@click.option("--format", "fmt", type=click.Choice(["csv", "xes"]), default=None)
@click.pass_obj
def replay(client, net, log, fmt):
    """Token-replay fitness of LOG on NET."""
    resp = client.call(
        "replay",
        m.QualityRequest(net=read_file(net), log=read_file(log), fmt=fmt or detect_format(log),
                         net_name=net, log_name=log),
    )
    finish(resp.report, resp.ok)


@main.command()
@click.argument("net", type=click.Path())
@click.argument("log", type=click.Path())
@click.option("--format", "fmt", type=click.Choice(["csv", "xes"]), default=None)
@click.pass_obj
def precision(client, net, log, fmt):
    """Escaping-edges precision of NET against LOG."""
    resp = client.call(
        "precision",
        m.QualityRequest(net=read_file(net), log=read_file(log), fmt=fmt or detect_format(log),
                         net_name=net, log_name=log),
    )
    finish(resp.report, resp.ok)


@main.command()
@click.argument("net", type=click.Path())
@click.option("--traces", required=True, type=int)
@click.option("--seed", required=True, type=int)
@click.option("--max-steps", type=int, default=None)
@click.option("--unsound-ok", is_flag=True, help="Play out nets that fail the soundness check.")
@click.option("-o", "--output", type=click.Path(), default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "xes"]), default=None)
@click.pass_obj
def playout(client, net, traces, seed, max_steps, unsound_ok, output, fmt):
    """Generate an event log by random playout of NET."""
    out_fmt = fmt or (detect_format(output) if output else "csv")
    resp = client.call(
        "playout",
        m.PlayoutRequest(
            net=read_file(net), name=net, traces=traces, seed=seed, max_steps=max_steps,
            unsound_ok=unsound_ok, out_fmt=out_fmt,
        ),
    )
    if not resp.ok:
        click.echo(resp.log, err=True)
        sys.exit(1)
    if resp.regenerated:
        click.echo(f"warning: regenerated {resp.regenerated} runs", err=True)
    if output:
        write_file(output, resp.log)
    else:
        click.echo(resp.log, nl=False)
    sys.exit(0)


@main.command()
@click.argument("log", type=click.Path())
@click.option("--partition", required=True, type=click.Path(),
              help="Agent partition file ([agent1]/[agent2] sections).")
@click.option("--protocol", required=True, nargs=3, type=click.Path(),
              metavar="ABS1 ABS2 CHAN",
              help="Abstract protocol: two component nets and the channel spec.")
@click.option("-o", "--output", type=click.Path(), default=None,
              help="Write the composed discovered net here.")
@click.option("--format", "fmt", type=click.Choice(["csv", "xes"]), default=None)
@click.pass_obj
def pipeline(client, log, partition, protocol, output, fmt):
    """Compositional discovery of LOG against an interaction protocol."""
    abs1, abs2, chan = protocol
    resp = client.call(
        "pipeline",
        m.PipelineRequest(
            log=read_file(log),
            fmt=fmt or detect_format(log),
            partition=read_file(partition),
            abstract1=read_file(abs1),
            abstract2=read_file(abs2),
            chan=read_file(chan),
            log_name=log,
            partition_name=partition,
            abstract1_name=abs1,
            abstract2_name=abs2,
            chan_name=chan,
        ),
    )
    if resp.ok and output and resp.net:
        write_file(output, resp.net)
    finish(resp.report, resp.ok)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
