"""``depthnormal`` command line.

Each subcommand reads files, runs one library operation and writes files.
Every PFM/PLY/PGM output gets a ``<output>.json`` sidecar echoing the full
configuration so runs can be reproduced.
"""
import argparse
import json
import sys

from . import io
from .camera import CameraIntrinsics, export_ply, unproject
from .config import GeoConfig
from .d2n import depth_to_normals
from .errors import DepthNormalError
from .maps import DepthMap, NormalMap
from .metrics import depth_metrics, normal_metrics, three_dgm
from .n2d import normals_to_depth
from .pipeline import refine_iterate
from .synth import SceneSpec, generate, shade


def _sidecar(path, command, **params):
    io.dump_json({"command": command, **params}, str(path) + ".json")


def _common(args):
    intr = CameraIntrinsics.load(args.intrinsics)
    cfg = GeoConfig.load(getattr(args, "config", None))
    return intr, cfg


def cmd_depth2normal(args):
    intr, cfg = _common(args)
    depth = io.load_pfm(args.depth, DepthMap)
    io.save_pfm(depth_to_normals(depth, intr, cfg), args.out)
    _sidecar(args.out, "depth2normal", config=cfg.to_dict(), intrinsics=intr.to_dict())


def cmd_normal2depth(args):
    intr, cfg = _common(args)
    depth = io.load_pfm(args.depth, DepthMap)
    normals = io.load_pfm(args.normals, NormalMap)
    io.save_pfm(normals_to_depth(depth, normals, intr, cfg), args.out)
    _sidecar(args.out, "normal2depth", config=cfg.to_dict(), intrinsics=intr.to_dict())


def cmd_refine(args):
    intr, cfg = _common(args)
    depth = io.load_pfm(args.depth, DepthMap)
    normals = io.load_pfm(args.normals, NormalMap)
    image = io.load_gray(args.image)
    residual = None
    if args.residual_weights:
        with open(args.residual_weights, "rb") as f:
            residual = io.read_residual_weights(f, depth.shape)
    depth, normals = refine_iterate(depth, normals, image, intr, cfg, residual=residual)
    io.save_pfm(depth, args.out_depth)
    io.save_pfm(normals, args.out_normals)
    for out in (args.out_depth, args.out_normals):
        _sidecar(out, "refine", config=cfg.to_dict(), intrinsics=intr.to_dict(),
                 residual_weights=bool(args.residual_weights))


def cmd_eval(args):
    intr, cfg = _common(args)
    pred = io.load_pfm(args.pred, DepthMap)
    gt = io.load_pfm(args.gt, DepthMap)
    report = {"depth": depth_metrics(pred, gt).to_dict()}
    if (args.normals_pred is None) != (args.normals_gt is None):
        raise DepthNormalError("--normals-pred and --normals-gt must be given together")
    if args.normals_pred:
        report["normals"] = normal_metrics(io.load_pfm(args.normals_pred, NormalMap),
                                           io.load_pfm(args.normals_gt, NormalMap)).to_dict()
    if args.three_dgm:
        report["3dgm"] = three_dgm(pred, gt, intr, cfg).to_dict()
    report["params"] = {"config": cfg.to_dict(), "intrinsics": intr.to_dict(),
                        "tv_strength": cfg.tv_strength, "tv_iters": cfg.tv_iters}
    io.dump_json(report, args.out)


def cmd_cast(args):
    intr = CameraIntrinsics.load(args.intrinsics)
    depth = io.load_pfm(args.depth, DepthMap)
    colors = io.load_rgb(args.color) if args.color else None
    cloud = unproject(depth, intr)
    with open(args.out, "wb") as f:
        export_ply(cloud, f, colors)
    _sidecar(args.out, "cast", intrinsics=intr.to_dict(), vertices=int(cloud.valid.sum()))


def cmd_synth(args):
    spec = SceneSpec.load(args.spec)
    depth, normals = generate(spec)
    io.save_pfm(depth, args.out_depth)
    io.save_pfm(normals, args.out_normals)
    outs = [args.out_depth, args.out_normals]
    if args.out_image:
        io.save_gray(shade(normals, depth), args.out_image)
        outs.append(args.out_image)
    for out in outs:
        _sidecar(out, "synth", spec=spec.to_dict())


def build_parser():
    p = argparse.ArgumentParser(prog="depthnormal", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("depth2normal", help="least-squares normals from a depth map")
    s.add_argument("--depth", required=True)
    s.add_argument("--intrinsics", required=True)
    s.add_argument("--config")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_depth2normal)

    s = sub.add_parser("normal2depth", help="kernel-regressed depth from normals")
    s.add_argument("--depth", required=True)
    s.add_argument("--normals", required=True)
    s.add_argument("--intrinsics", required=True)
    s.add_argument("--config")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_normal2depth)

    s = sub.add_parser("refine", help="iterated geometric + edge-aware refinement")
    s.add_argument("--depth", required=True)
    s.add_argument("--normals", required=True)
    s.add_argument("--image", required=True, help="grayscale PNG/PGM guiding the edge detector")
    s.add_argument("--intrinsics", required=True)
    s.add_argument("--config")
    s.add_argument("--residual-weights", help="single-channel PFM of height 4H (see docs)")
    s.add_argument("--out-depth", required=True)
    s.add_argument("--out-normals", required=True)
    s.set_defaults(func=cmd_refine)

    s = sub.add_parser("eval", help="depth, normal and 3DGM metrics as JSON")
    s.add_argument("--pred", required=True)
    s.add_argument("--gt", required=True)
    s.add_argument("--normals-pred")
    s.add_argument("--normals-gt")
    s.add_argument("--intrinsics", required=True)
    s.add_argument("--config")
    s.add_argument("--3dgm", dest="three_dgm", action="store_true")
    s.add_argument("--out", required=True, help="report path, '-' for stdout")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("cast", help="unproject a depth map to an ASCII PLY")
    s.add_argument("--depth", required=True)
    s.add_argument("--intrinsics", required=True)
    s.add_argument("--color")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_cast)

    s = sub.add_parser("synth", help="render an analytic scene")
    s.add_argument("--spec", required=True)
    s.add_argument("--out-depth", required=True)
    s.add_argument("--out-normals", required=True)
    s.add_argument("--out-image")
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except FileNotFoundError as e:
        print(f"depthnormal: error: file not found: {e.filename}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as e:
        print(f"depthnormal: error: invalid JSON: {e}", file=sys.stderr)
        return 1
    except (DepthNormalError, OSError, ValueError, TypeError) as e:
        print(f"depthnormal: error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
