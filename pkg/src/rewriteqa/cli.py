"""Command-line client for the rewriteqa service.

Every command talks HTTP to the service.  Without --server an app instance is
created in-process from the resource flags and driven through an ASGI test
transport, so no daemon is needed; with --server the flags for mine/train/eval
paths refer to the server's filesystem.

Exit codes: 0 success, 1 usage or I/O error, 2 no answer.
"""

from __future__ import annotations

import sys

import click

from .errors import RewriteQAError
from .resources import Config

SERVER_OPTION = click.option("--server", default=None, help="Base URL of a running service.")


def _resource_options(fn):
    for option in reversed([
        click.option("--kb", "kb_path", default=None, help="Knowledge base file."),
        click.option("--pos", "pos_path", default=None, help="POS lexicon file."),
        click.option("--aliases", "aliases_path", default=None, help="Entity alias file."),
        click.option("--lexicon", "triggers_path", default=None, help="Trigger lexicon file."),
        click.option("--dict", "dict_path", default=None, help="Rewriting dictionary file."),
        click.option("--template-db", "template_db_path", default=None, help="Template pair DB file."),
        click.option("--model", "model_path", default=None, help="Model parameter file."),
        click.option("--beam", default=200, show_default=True, help="Parser beam size."),
        click.option("--kd", default=100, show_default=True, help="Dictionary rewriting cap."),
        click.option("--kt", default=100, show_default=True, help="Template rewriting cap."),
        click.option("--epochs", default=3, show_default=True, help="Training epochs."),
        click.option("--threshold", default=3, show_default=True, help="Mining co-occurrence threshold."),
        click.option("--lambda", "rerank_weight", default=10.0, show_default=True,
                     help="Reward weight when picking update targets."),
        SERVER_OPTION,
    ]):
        fn = option(fn)
    return fn


def _config(kw) -> Config:
    try:
        return Config(
            kb_path=kw["kb_path"],
            pos_path=kw["pos_path"],
            aliases_path=kw["aliases_path"],
            triggers_path=kw["triggers_path"],
            dict_path=kw["dict_path"],
            template_db_path=kw["template_db_path"],
            model_path=kw["model_path"],
            beam=kw["beam"],
            kd=kw["kd"],
            kt=kw["kt"],
            epochs=kw["epochs"],
            threshold=kw["threshold"],
            rerank_weight=kw["rerank_weight"],
        )
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc


def _client(server, config: Config):
    if server:
        import httpx

        return httpx.Client(base_url=server, timeout=300.0)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service import create_app

    try:
        return TestClient(create_app(config))
    except RewriteQAError as exc:
        raise click.ClickException(str(exc)) from exc


def _post(client, path, payload):
    response = client.post(path, json=payload)
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except Exception:
            detail = response.text
        raise click.ClickException(f"{path} failed: {detail}")
    return response.json()


@click.group()
def cli():
    """Question answering over a small knowledge base with sentence rewriting."""


@cli.command()
@_resource_options
@click.option("--clusters", "clusters_path", required=True, help="Question clusters file.")
@click.option("--out", "output_path", default=None, help="Output DB path (defaults to --template-db).")
def mine(clusters_path, output_path, **kw):
    """Mine paraphrase template pairs from question clusters."""
    output_path = output_path or kw["template_db_path"]
    if not output_path:
        raise click.UsageError("mine needs --out or --template-db for the output path")
    config = _config({**kw, "template_db_path": None})
    with _client(kw["server"], config) as client:
        result = _post(client, "/mine", {
            "clusters_path": clusters_path,
            "output_path": output_path,
            "threshold": kw["threshold"],
        })
    click.echo(f"clusters\t{result['clusters']}")
    click.echo(f"clusters_skipped\t{result['clusters_skipped']}")
    click.echo(f"pairs\t{result['pairs']}")
    if result["pairs"] == 0:
        click.echo("warning: no pairs survived the threshold", err=True)
    click.echo(f"db\t{result['output_path']}")


@cli.command()
@_resource_options
@click.argument("sentence")
def rewrite(sentence, **kw):
    """Print all candidate rewritings of SENTENCE with traces and features."""
    config = _config(kw)
    with _client(kw["server"], config) as client:
        result = _post(client, "/rewrite", {"sentence": sentence, "kd": kw["kd"], "kt": kw["kt"]})
    for entry in result["rewritings"]:
        feats = ",".join(f"{k}={v:.6g}" for k, v in sorted(entry["features"].items()))
        click.echo(f"{entry['text']}\t{entry['trace']}\t{feats}")


@cli.command()
@_resource_options
@click.option("--qa", "qa_path", required=True, help="Question/answer training file.")
def train(qa_path, **kw):
    """Train model parameters from question/answer pairs."""
    if kw["epochs"] < 1:
        raise click.UsageError("--epochs must be >= 1")
    if not kw["model_path"]:
        raise click.UsageError("train needs --model for the output path")
    config = _config(kw)
    with _client(kw["server"], config) as client:
        result = _post(client, "/train", {
            "qa_path": qa_path,
            "model_path": kw["model_path"],
            "epochs": kw["epochs"],
        })
    click.echo(f"examples\t{result['examples']}")
    click.echo(f"updates\t{result['updates']}")
    click.echo(f"skipped\t{result['skipped']}")
    click.echo(f"features\t{result['theta1_features'] + result['theta2_features']}")
    click.echo(f"model\t{result['model_path']}")


@cli.command()
@_resource_options
@click.option("--explain", is_flag=True, help="Also print the rewriting trace.")
@click.argument("question")
def answer(question, explain, **kw):
    """Answer QUESTION; exits 2 when nothing parses."""
    config = _config(kw)
    with _client(kw["server"], config) as client:
        result = _post(client, "/answer", {"question": question, "explain": explain})
    if not result["found"]:
        click.echo("no answer", err=True)
        sys.exit(2)
    if result.get("number") is not None:
        click.echo(f"answers\t{result['number']}")
    else:
        click.echo("answers\t" + "|".join(result["answers"]))
    click.echo(f"rewriting\t{result['rewriting']}")
    click.echo(f"lf\t{result['logical_form']}")
    if explain:
        click.echo(f"trace\t{result['trace']}")


@cli.command(name="eval")
@_resource_options
@click.option("--qa", "qa_path", required=True, help="Question/answer file to score.")
@click.option("--mismatch-only", is_flag=True, help="Score only mismatch-marked questions.")
def eval_command(qa_path, mismatch_only, **kw):
    """Report macro-averaged precision/recall/F1 over a QA file."""
    config = _config(kw)
    with _client(kw["server"], config) as client:
        result = _post(client, "/eval", {"qa_path": qa_path, "mismatch_only": mismatch_only})
    overall = result["overall"]
    click.echo(f"n\t{overall['count']}")
    click.echo(f"precision\t{overall['precision']:.6f}")
    click.echo(f"recall\t{overall['recall']:.6f}")
    click.echo(f"f1\t{overall['f1']:.6f}")
    if result.get("mismatch"):
        block = result["mismatch"]
        click.echo(f"mismatch_n\t{block['count']}")
        click.echo(f"mismatch_f1\t{block['f1']:.6f}")


@cli.command()
@_resource_options
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host, port, **kw):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    app = create_app(_config(kw))
    uvicorn.run(app, host=host, port=port)


def main():
    try:
        cli.main(standalone_mode=False)
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        sys.exit(1)
    except click.ClickException as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        sys.exit(1)
    except click.Abort:
        sys.exit(1)


if __name__ == "__main__":
    main()
