"""Command-line front end.

Subcommands map one-to-one onto the library: `noise` and `phase-mix` for
the spectral constructions, `make-corpus` / `train` / `sample` / `eval`
for the generative pipeline, and `demo-video` for per-frame noise over an
image sequence.  Every command is deterministic given its flags: all
randomness derives from --seed through named substreams (the stream
layout is documented next to each command function).

Images move through two formats: the float64 tensor container (full
precision, see io.py) and 8-bit binary PGM for visualization.  Commands
that write an image emit both, the PGM next to the tensor with the same
stem.  Metric reports are key=value lines.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io as pdio
from .corpus import SynthCorpusConfig, generate_corpus
from .denoiser import (
    DDPM_STEPS,
    DenoiserParams,
    TrainConfig,
    TrainingDivergenceError,
    forward,
    train,
)
from .diffusion import ddpm_linear_schedule, ddpm_sample, flow_sample
from .metrics import log_mag_distance, phase_correlation, report
from .noise import (
    DegeneratePhaseError,
    NoiseSpec,
    RadiusSampler,
    fss_noise,
    noise_sequence,
    phase_preserving_noise,
)
from .rng import make_rng, substream
from .spectral import SymmetryError, phase_mix

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


RUN_CONFIG_DEFAULTS = {
    # training (TrainConfig; r0/lambda mirror its RadiusSampler, and
    # structured_noise False switches to the plain-Gaussian baseline)
    "objective": "flow",
    "epochs": 4,
    "batch_size": 16,
    "learning_rate": 0.2,
    "r0": 4.0,
    "lambda": 0.1,
    "structured_noise": True,
    # noise (NoiseSpec)
    "magnitude_source": "gaussian_fft",
    "cutoff_radius": None,
    "sigma": 2.0,
    "normalize": True,
    # corpus (SynthCorpusConfig)
    "count": 100,
    "size": 64,
    "objects_min": 1,
    "objects_max": 3,
    # shared
    "seed": 0,
}


def _coerce_config_value(key, value):
    default = RUN_CONFIG_DEFAULTS[key]
    if key == "cutoff_radius":
        return None if value is None else float(value)
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ValueError("expected true/false")
        return value
    if isinstance(default, int):
        if float(value) != int(value):
            raise ValueError("expected an integer")
        return int(value)
    if isinstance(default, float):
        return float(value)
    return str(value)


def load_run_config(path=None, overrides=None):
    """Flat key-value run configuration with defaults.

    Invalid keys are rejected, every offending key listed in the error.
    """
    merged = dict(RUN_CONFIG_DEFAULTS)
    supplied = {}
    if path is not None:
        with open(path) as fh:
            supplied = json.load(fh)
        if not isinstance(supplied, dict):
            raise ValueError(f"{path}: run config must be a JSON object")
    if overrides:
        supplied.update(overrides)
    bad = [f"{k} (unknown)" for k in sorted(set(supplied) - set(RUN_CONFIG_DEFAULTS))]
    for key in sorted(set(supplied) & set(RUN_CONFIG_DEFAULTS)):
        try:
            merged[key] = _coerce_config_value(key, supplied[key])
        except (TypeError, ValueError) as err:
            bad.append(f"{key} ({err})")
    if bad:
        raise ValueError(f"invalid config keys: {'; '.join(bad)}")
    return merged


def train_config_from_run(cfg):
    sampler = RadiusSampler(r0=cfg["r0"], lam=cfg["lambda"]) if cfg["structured_noise"] else None
    return TrainConfig(
        objective=cfg["objective"],
        epochs=cfg["epochs"],
        batch_size=cfg["batch_size"],
        learning_rate=cfg["learning_rate"],
        radius_sampler=sampler,
        sigma=cfg["sigma"],
        magnitude_source=cfg["magnitude_source"],
        seed=cfg["seed"],
    )


def _write_image_pair(path, image):
    """Tensor at `path`, PGM visualization alongside with a .pgm suffix."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pdio.write_tensor(path, image)
    pdio.write_pgm(path.with_suffix(".pgm"), image)


def _parse_radius(text):
    """--r grammar: 'none', a single real, or a comma list of reals."""
    if text.lower() == "none":
        return [None]
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"--r expects 'none' or comma-separated reals, got {text!r}") from None
    if not values:
        raise UsageError("--r is empty")
    if any(v < 0 for v in values):
        raise UsageError("--r values must be >= 0")
    return values


def cmd_noise(args):
    """Structured noise for one input image.

    Stream layout: every radius in the sweep uses an identically-seeded
    generator, so the whole sweep shares one underlying noise draw and
    only the mask changes (the radius-sweep figures are drawn this way).
    """
    img = pdio.read_image(args.input)
    out = Path(args.out)
    spec_kwargs = dict(
        magnitude_source=args.mag_source,
        sigma=args.sigma,
        normalize=not args.no_normalize,
        seed=args.seed,
    )
    if args.r.lower() == "full":
        noise = phase_preserving_noise(img, NoiseSpec(**spec_kwargs), make_rng(args.seed))
        _write_image_pair(out, noise)
        return EXIT_OK
    radii = _parse_radius(args.r)
    sweep_rows = []
    for r in radii:
        spec = NoiseSpec(cutoff_radius=r, **spec_kwargs)
        noise = fss_noise(img, spec, make_rng(args.seed))
        if len(radii) == 1:
            path = out
        else:
            path = out.with_name(f"{out.stem}_r{r:g}{out.suffix}")
        _write_image_pair(path, noise)
        if len(radii) > 1:
            sweep_rows.append((r, phase_correlation(noise, img)))
    for r, pc in sweep_rows:
        print(f"{r:g}\t{pc:.6f}")
    return EXIT_OK


def cmd_phase_mix(args):
    phase_img = pdio.read_image(args.phase_from)
    mag_img = pdio.read_image(args.mag_from)
    mixed = phase_mix(phase_img, mag_img)
    _write_image_pair(Path(args.out), mixed)
    return EXIT_OK


def cmd_make_corpus(args):
    cfg = load_run_config(args.config, _config_overrides(args, ("count", "size", "seed")))
    pairs = generate_corpus(
        SynthCorpusConfig(
            count=cfg["count"],
            size=cfg["size"],
            seed=cfg["seed"],
            objects_min=cfg["objects_min"],
            objects_max=cfg["objects_max"],
        )
    )
    arrays = {}
    for i, pair in enumerate(pairs):
        arrays[f"flat_{i:05d}"] = pair.flat
        arrays[f"shaded_{i:05d}"] = pair.shaded
    pdio.write_bundle(args.out, arrays)
    print(f"wrote {len(pairs)} pairs to {args.out}")
    return EXIT_OK


def _load_corpus_images(directory, kind):
    bundle = pdio.read_bundle(directory)
    names = sorted(n for n in bundle if n.startswith(kind + "_"))
    if not names:
        raise pdio.DataFormatError(f"{directory}: no {kind}_* arrays in the corpus bundle")
    return [bundle[n] for n in names]


def cmd_train(args):
    cfg = load_run_config(args.config, _config_overrides(args, ("seed", "epochs", "objective")))
    if args.gaussian:
        cfg["structured_noise"] = False
    images = _load_corpus_images(args.corpus, "shaded")
    params, history = train(images, train_config_from_run(cfg))
    arrays = dict(params.arrays())
    arrays["loss_history"] = np.asarray(history)
    arrays["objective_ddpm"] = np.array([1.0 if cfg["objective"] == "ddpm" else 0.0])
    pdio.write_bundle(args.out, arrays)
    print(f"trained {cfg['objective']} model, final epoch loss {history[-1]:.6f}")
    return EXIT_OK


def load_checkpoint(directory):
    bundle = pdio.read_bundle(directory)
    history = bundle.pop("loss_history", None)
    objective = "ddpm" if bundle.pop("objective_ddpm", np.zeros(1))[0] == 1.0 else "flow"
    params = DenoiserParams(**bundle)
    return params, objective, history


def _start_noise(img, args, rng):
    if args.r.lower() == "full":
        spec = NoiseSpec(magnitude_source=args.mag_source, sigma=args.sigma, seed=args.seed)
        return phase_preserving_noise(img, spec, rng)
    radii = _parse_radius(args.r)
    if len(radii) != 1:
        raise UsageError("sample takes a single --r value")
    spec = NoiseSpec(
        magnitude_source=args.mag_source,
        cutoff_radius=radii[0],
        sigma=args.sigma,
        seed=args.seed,
    )
    return fss_noise(img, spec, rng)


def _sample_from(params, objective, start, steps, rng):
    """--steps drives the flow integrator; a DDPM checkpoint always runs
    its full training schedule (ancestral sampling does not subsample)."""
    if objective == "flow":
        return flow_sample(lambda x, t: forward(params, x, t), start, steps)
    sched = ddpm_linear_schedule(DDPM_STEPS)
    return ddpm_sample(
        lambda x, t: forward(params, x, t / (sched.T - 1)), start, sched, rng
    )


def cmd_sample(args):
    """Generate from structured noise built on the input image.

    Stream layout: substream 0 of --seed draws the start noise; the DDPM
    reverse process consumes substream 1.
    """
    params, objective, _ = load_checkpoint(args.checkpoint)
    img = pdio.read_image(args.input)
    root = make_rng(args.seed)
    start = _start_noise(img, args, substream(root, 0))
    out = _sample_from(params, objective, start, args.steps, substream(root, 1))
    _write_image_pair(Path(args.out), out)
    return EXIT_OK


def cmd_eval(args):
    if args.sweep:
        return _eval_sweep(args)
    a = pdio.read_image(args.a)
    b = pdio.read_image(args.b)
    lines = report(a, b).lines()
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    return EXIT_OK


def _eval_sweep(args):
    """Inference-radius sweep: sample at each r, report alignment/realism.

    Stream layout: seed s of --seeds uses root (seed + s); within it the
    start noise for every radius uses substream (s-th root, 0), shared
    across radii so only the mask varies.
    """
    if not args.checkpoint or not args.input:
        raise UsageError("--sweep requires --checkpoint and --input")
    params, objective, _ = load_checkpoint(args.checkpoint)
    img = pdio.read_image(args.input)
    ref = pdio.read_image(args.ref) if args.ref else img
    radii = [r for r in _parse_radius(args.r_list) if r is not None]
    rows = []
    for r in radii:
        pcs, dists = [], []
        for s in range(args.seeds):
            spec = NoiseSpec(sigma=args.sigma, cutoff_radius=r, seed=args.seed + s)
            root = make_rng(args.seed + s)
            start = fss_noise(img, spec, substream(root, 0))
            out = _sample_from(params, objective, start, args.steps, substream(root, 1))
            pcs.append(phase_correlation(out, img))
            dists.append(log_mag_distance(out, ref))
        rows.append((r, float(np.mean(pcs)), float(np.mean(dists))))
    lines = ["r\tphase_correlation\tlog_mag_distance"]
    lines += [f"{r:g}\t{pc:.6f}\t{d:.6f}" for r, pc, d in rows]
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    return EXIT_OK


def cmd_demo_video(args):
    """Per-frame structured noise (frame k uses substream k), plus optional
    per-frame generation when a checkpoint is given."""
    frame_dir = Path(args.frames)
    paths = sorted(
        p for p in frame_dir.iterdir() if p.suffix in (".pdt", ".pgm") and p.is_file()
    )
    if not paths:
        raise pdio.DataFormatError(f"{frame_dir}: no .pdt or .pgm frames found")
    frames = [pdio.read_image(p) for p in paths]
    if args.r.lower() == "full":
        h, w = frames[0].shape
        radius = float(np.hypot(h / 2, w / 2))  # saturates the mask
    else:
        radii = _parse_radius(args.r)
        if len(radii) != 1:
            raise UsageError("demo-video takes a single --r value")
        radius = radii[0]
    spec = NoiseSpec(
        magnitude_source=args.mag_source,
        cutoff_radius=radius,
        sigma=args.sigma,
        seed=args.seed,
    )
    noises = noise_sequence(frames, spec, make_rng(args.seed))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for k, noise in enumerate(noises):
        _write_image_pair(out_dir / f"noise_{k:05d}.pdt", noise)

    if args.checkpoint:
        params, objective, _ = load_checkpoint(args.checkpoint)
        for k, noise in enumerate(noises):
            out = _sample_from(
                params, objective, noise, args.steps,
                substream(make_rng(args.seed), 1000 + k),
            )
            _write_image_pair(out_dir / f"frame_{k:05d}.pdt", out)
    print(f"wrote {len(noises)} frames to {out_dir}")
    return EXIT_OK


def _config_overrides(args, names):
    out = {}
    for name in names:
        value = getattr(args, name, None)
        if value is not None:
            out[name] = value
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # argparse exits with 2 by default; usage errors are exit code 1 here
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser():
    parser = _Parser(prog="phasediff", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_noise_flags(p, default_r="full"):
        p.add_argument("--r", default=default_r, help="cutoff radius: real, list, 'none' or 'full'")
        p.add_argument("--sigma", type=float, default=2.0, help="mask transition bandwidth")
        p.add_argument(
            "--mag-source",
            choices=("gaussian_fft", "rayleigh"),
            default="gaussian_fft",
            dest="mag_source",
        )
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("noise", help="structured noise for an input image")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--no-normalize", action="store_true")
    add_noise_flags(p, default_r="full")
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("phase-mix", help="swap phase and magnitude between two images")
    p.add_argument("--phase-from", required=True, dest="phase_from")
    p.add_argument("--mag-from", required=True, dest="mag_from")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_phase_mix)

    p = sub.add_parser("make-corpus", help="generate the paired flat/shaded corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--size", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_make_corpus)

    p = sub.add_parser("train", help="train a predictor on corpus shaded images")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--objective", choices=("flow", "ddpm"), default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--gaussian", action="store_true", help="plain Gaussian noise baseline")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sample", help="generate from structured noise on an input image")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--steps", type=int, default=50)
    add_noise_flags(p, default_r="full")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("eval", help="metric report for two images, or a radius sweep")
    p.add_argument("--a")
    p.add_argument("--b")
    p.add_argument("--out", default=None)
    p.add_argument("--sweep", action="store_true")
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--input", default=None)
    p.add_argument("--ref", default=None)
    p.add_argument("--r-list", default="1,6,10,20,30", dest="r_list")
    p.add_argument("--seeds", type=int, default=8)
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--sigma", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("demo-video", help="per-frame structured noise for an image sequence")
    p.add_argument("--frames", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--steps", type=int, default=50)
    add_noise_flags(p, default_r="full")
    p.set_defaults(func=cmd_demo_video)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "eval" and not args.sweep and (not args.a or not args.b):
            raise UsageError("eval requires --a and --b (or --sweep)")
        return args.func(args)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (pdio.DataFormatError, DegeneratePhaseError, OSError, ValueError) as err:
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except (SymmetryError, TrainingDivergenceError, FloatingPointError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
