"""Command-line interface.

Subcommands: generate, render, edit, stylize, eval, validate-dataset,
export-finetune, serve. Backend endpoints come from an optional config
file plus POSTERKIT_*_URL environment overrides (env wins), so the same
commands run fully offline on the local fallbacks or against hosted
backends without code changes.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import evaluate
from .backends import BackendEndpoint, BackendKind, endpoints_from_env
from .document import deserialize, document_to_tree, edit_from_tree, serialize
from .errors import InputError
from .pipeline import (PipelineConfig, PosterRequest, render_document, run_pipeline,
                       session_restyle)
from .planner import plan_item_from_tree
from .raster import RasterImage


def load_config(path: str | None, args: argparse.Namespace | None = None) -> PipelineConfig:
    tree = {}
    if path:
        tree = json.loads(Path(path).read_text(encoding="utf-8"))
    endpoints = {}
    for kind_name, spec in (tree.get("endpoints") or {}).items():
        kind = BackendKind(kind_name)
        endpoints[kind] = BackendEndpoint(
            kind=kind, url=spec["url"],
            auth_token_env=spec.get("auth_token_env"),
            timeout=float(spec.get("timeout", 30.0)),
            retries=int(spec.get("retries", 2)),
        )
    endpoints.update(endpoints_from_env())
    planner_endpoint = endpoints.pop(BackendKind.PLANNER, None)

    canvas = tree.get("canvas") or {}
    kwargs = dict(
        canvas_width=int(canvas.get("width", 1024)),
        canvas_height=int(canvas.get("height", 1448)),
        seed=int(tree.get("seed", 0)),
        feather_sigma=tree.get("feather_sigma"),
        planner=tree.get("planner", "rule"),
        stylize_title=bool(tree.get("stylize_title", False)),
        endpoints=endpoints,
        planner_endpoint=planner_endpoint,
        font_registry_path=tree.get("font_registry"),
    )
    if args is not None:
        if getattr(args, "seed", None) is not None:
            kwargs["seed"] = args.seed
        if getattr(args, "canvas", None):
            width, _, height = args.canvas.partition("x")
            kwargs["canvas_width"] = int(width)
            kwargs["canvas_height"] = int(height)
        if getattr(args, "planner", None):
            kwargs["planner"] = args.planner
        if getattr(args, "stylize_title", False):
            kwargs["stylize_title"] = True
    return PipelineConfig(**kwargs)


def _load_request(path: str, base_dir: Path) -> PosterRequest:
    tree = json.loads(Path(path).read_text(encoding="utf-8"))
    items = tuple(plan_item_from_tree(item) for item in tree.get("items", []))
    background = tree.get("background") or {}
    image = None
    image_ref = None
    if "image" in background:
        image_ref = background["image"]
        image = RasterImage.load(base_dir / image_ref)
    return PosterRequest(
        items=items,
        background_prompt=background.get("prompt"),
        background_image=image,
        background_image_ref=image_ref,
        style_hint=tree.get("style_hint"),
    )


def cmd_generate(args) -> int:
    config = load_config(args.config, args)
    request = _load_request(args.request, Path(args.request).parent)
    doc, image = run_pipeline(request, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "poster.poster.json").write_text(serialize(doc), encoding="utf-8")
    image.save(out / "poster.png")
    print(f"wrote {out / 'poster.png'} and {out / 'poster.poster.json'}")
    return 0


def cmd_render(args) -> int:
    config = load_config(args.config, args)
    doc = deserialize(Path(args.document).read_text(encoding="utf-8"))
    image = render_document(doc, config, base_dir=Path(args.document).parent)
    image.save(args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_edit(args) -> int:
    from .document import apply_edit
    config = load_config(args.config, args)
    doc = deserialize(Path(args.document).read_text(encoding="utf-8"))
    edits = json.loads(Path(args.edits).read_text(encoding="utf-8"))
    if not isinstance(edits, list):
        edits = [edits]
    for tree in edits:
        doc = apply_edit(doc, edit_from_tree(tree))
    Path(args.out).write_text(serialize(doc), encoding="utf-8")
    print(f"wrote {args.out} (revision {doc.revision})")
    if args.render:
        image = render_document(doc, config, base_dir=Path(args.document).parent)
        image.save(args.render)
        print(f"wrote {args.render}")
    return 0


def cmd_stylize(args) -> int:
    from .pipeline import Session, Stage, resolve_background
    config = load_config(args.config, args)
    doc = deserialize(Path(args.document).read_text(encoding="utf-8"))
    doc = resolve_background(doc, config, base_dir=Path(args.document).parent)
    shim = Session(id="cli", history=(doc,), stage=Stage.STYLIZATION, config=config)
    shim = session_restyle(shim, args.element, style_prompt=args.prompt, seed=args.seed)
    Path(args.out).write_text(serialize(shim.current), encoding="utf-8")
    print(f"wrote {args.out}")
    if args.render:
        image = render_document(shim.current, config, base_dir=Path(args.document).parent)
        image.save(args.render)
        print(f"wrote {args.render}")
    return 0


def _iter_corpus(corpus_dir: Path, config: PipelineConfig):
    docs = sorted(corpus_dir.glob("*.poster.json"))
    if not docs:
        raise InputError(f"no *.poster.json documents under {corpus_dir}")
    for doc_path in docs:
        doc = deserialize(doc_path.read_text(encoding="utf-8"))
        png = doc_path.with_name(doc_path.name.replace(".poster.json", ".png"))
        if png.exists():
            image = RasterImage.load(png)
        else:
            image = render_document(doc, config, base_dir=doc_path.parent)
        yield image, doc


def cmd_eval(args) -> int:
    config = load_config(args.config, args)
    ocr_endpoint = config.endpoints.get(BackendKind.OCR)
    report = evaluate.evaluate_corpus(list(_iter_corpus(Path(args.corpus), config)),
                                      ocr_endpoint=ocr_endpoint)
    print(evaluate.format_report(report))
    if args.json:
        Path(args.json).write_text(
            json.dumps(evaluate.report_to_tree(report), indent=2, sort_keys=True) + "\n",
            encoding="utf-8")
    if report.recall < args.threshold:
        print(f"FAIL: corpus recall {report.recall:.4f} < threshold {args.threshold}",
              file=sys.stderr)
        return 1
    return 0


def cmd_validate_dataset(args) -> int:
    from . import dataset
    total_issues = 0
    if args.kind == "design":
        for path, record, issues in dataset.load_design_corpus(args.manifest):
            if record is not None:
                issues = issues + dataset.validate_design(record, base_dir=path.parent)
            for issue in issues:
                total_issues += 1
                print(f"{path.name}: {issue.rule_id} at {issue.path}: {issue.message}")
    else:
        base = Path(args.manifest)
        for path in dataset.load_manifest(args.manifest):
            try:
                record = dataset.textseg_record_from_tree(
                    json.loads(path.read_text(encoding="utf-8")))
            except Exception as exc:
                print(f"{path.name}: unreadable_record: {exc}")
                total_issues += 1
                continue
            for issue in dataset.validate_textseg(record, base_dir=path.parent):
                total_issues += 1
                print(f"{path.name}: {issue.rule_id} at {issue.path}: {issue.message}")
    print(f"{total_issues} issue(s)")
    return 0 if total_issues == 0 else 1


def cmd_export_finetune(args) -> int:
    from . import dataset
    records = []
    sizes = []
    skipped = 0
    for path, record, issues in dataset.load_design_corpus(args.manifest):
        if record is None:
            skipped += 1
            for issue in issues:
                print(f"{path.name}: {issue.rule_id}: {issue.message}", file=sys.stderr)
            continue
        size = dataset._image_size(path.parent / record.background_ref)
        if size is None:
            skipped += 1
            print(f"{path.name}: missing_background: {record.background_ref}", file=sys.stderr)
            continue
        records.append(record)
        sizes.append(size)
    text, diagnostics = dataset.export_finetune(records, sizes, template_id=args.template)
    for diag in diagnostics:
        skipped += 1
        print(f"{diag.rule_id} at {diag.path}: {diag.message}", file=sys.stderr)
    Path(args.out).write_text(text, encoding="utf-8")
    exported = len(text.splitlines())
    print(f"wrote {args.out}: {exported} pair(s), {skipped} record(s) excluded")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    config = load_config(args.config, args)
    app = create_app(config)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="posterkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="pipeline config JSON file")
        p.add_argument("--seed", type=int, help="override seed")
        p.add_argument("--canvas", help="override canvas, e.g. 1024x1448")

    p = sub.add_parser("generate", help="prompt file -> poster + document")
    common(p)
    p.add_argument("--request", required=True, help="poster request JSON file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--planner", choices=["rule", "remote"])
    p.add_argument("--stylize-title", action="store_true", dest="stylize_title")
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("render", help="document -> PNG")
    common(p)
    p.add_argument("--document", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_render)

    p = sub.add_parser("edit", help="document + edit script -> document (+PNG)")
    common(p)
    p.add_argument("--document", required=True)
    p.add_argument("--edits", required=True, help="JSON edit command or list of them")
    p.add_argument("--out", required=True)
    p.add_argument("--render", help="also render the result to this PNG")
    p.set_defaults(fn=cmd_edit)

    p = sub.add_parser("stylize", help="stylize one element via the stylizer backend")
    common(p)
    p.add_argument("--document", required=True)
    p.add_argument("--element", required=True, help="element id")
    p.add_argument("--prompt", help="style prompt (defaults to the element text)")
    p.add_argument("--out", required=True)
    p.add_argument("--render", help="also render the result to this PNG")
    p.set_defaults(fn=cmd_stylize)

    p = sub.add_parser("eval", help="corpus of documents -> word precision/recall")
    common(p)
    p.add_argument("--corpus", required=True, help="directory of *.poster.json (+ optional .png)")
    p.add_argument("--threshold", type=float, default=1.0,
                   help="exit nonzero if corpus recall falls below this")
    p.add_argument("--json", help="write the machine-readable report here")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("validate-dataset", help="validate an annotation corpus")
    p.add_argument("--manifest", required=True)
    p.add_argument("--kind", choices=["design", "textseg"], default="design")
    p.set_defaults(fn=cmd_validate_dataset)

    p = sub.add_parser("export-finetune", help="corpus -> instruction-pair JSONL")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--template", default="planner-v1")
    p.set_defaults(fn=cmd_export_finetune)

    p = sub.add_parser("serve", help="run the HTTP service")
    common(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8021)
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
