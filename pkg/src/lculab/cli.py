"""Command line reports for the experiment suite.

Each subcommand runs one experiment and writes three files with a shared
stem into the output directory: a CSV table with the numbers, a JSON
metadata file recording the seed, the resolved parameters, and package
versions, and a PNG figure drawn from the same rows. Nothing else is
written, and reruns with the same configuration produce bit-identical
CSV and JSON files.

Configuration comes from command line flags, optionally layered over a
JSON file given with --config; explicit flags win. Exit codes: 0 on
success, 2 for configuration problems (the message names the offending
field), 3 when a numerical invariant fails during the run.
"""

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from lculab import __version__
from lculab.plots import (
    save_alpha_sweep_plot,
    save_bar_plot,
    save_error_plot,
    save_image_pair,
    save_line_plot,
    save_sweep_panels,
)

import matplotlib

from lculab.kernel import AlphaSweepConfig, alpha_sweep_experiment
from lculab.lcu import run_lcu
from lculab.pooling import (
    ImageGrid,
    PoolingSpec,
    encoded_block,
    load_mnist_images,
    mnist_probability_sweep,
    pool_image,
    pooling_success_probability,
    synthetic_digit_images,
)
from lculab.projections import (
    ProjectionWeights,
    apply_projector,
    build_projection_program,
    conjugacy_class_program,
    projection_success_probability,
    qudit_permutation_rep,
    rotational_invariance_experiment,
    subspace_weights,
    symmetric_group,
)
from lculab.resnet import (
    PlateauConfig,
    build_uniform_ensemble,
    ensemble_expected_attempts,
    expand_ensemble,
    haar_sublayer_factory,
    plateau_experiment,
)
from lculab.sim import PostSelectionImpossible, Statevector


class ConfigError(Exception):
    """Bad or missing configuration; the message names the field."""


REQUIRED = object()

# field -> (kind, default); REQUIRED defaults must be supplied by the user
SCHEMAS = {
    "resnet-variance": {
        "qubits": ("int_list", (2, 4, 6, 8)),
        "samples": ("int", 500),
        "sublayers": ("int", 5),
        "residual": ("bool", True),
        "seed": ("int", REQUIRED),
        "out": ("str", "."),
    },
    "resnet-ensemble": {
        "layers": ("int", 2),
        "qubits": ("int", 3),
        "beta": ("float", 0.5),
        "seed": ("int", REQUIRED),
        "out": ("str", "."),
    },
    "resnet-attempts": {
        "layers": ("int", 2),
        "qubits": ("int", 3),
        "betas": ("float_list", (0.5, 0.6, 0.7, 0.8, 0.9)),
        "seed": ("int", REQUIRED),
        "out": ("str", "."),
    },
    "pool-verify": {
        "size": ("int", 8),
        "d": ("int", 3),
        "seed": ("int", REQUIRED),
        "out": ("str", "."),
    },
    "pool-sweep": {
        "images": ("int", 100),
        "d_list": ("int_list", (2, 3, 4, 5, 6, 7, 8)),
        "n_list": ("int_list", (8, 16, 28)),
        "d_for_n": ("int", 3),
        "mnist_dir": ("str", None),
        "seed": ("int", REQUIRED),
        "out": ("str", "."),
    },
    "project-verify": {
        "group": ("str", "s3"),
        "cases": ("int", 10),
        "via": ("str", "element"),
        "seed": ("int", REQUIRED),
        "out": ("str", "."),
    },
    "rotinv-overlap": {
        "clouds": ("int", 50),
        "angles": ("int", 20),
        "seed": ("int", REQUIRED),
        "out": ("str", "."),
    },
    "alpha-sweep": {
        "alphas": ("float_list", tuple(i / 10 for i in range(11))),
        "repetitions": ("int", 10),
        "samples": ("int", 100),
        "points": ("int", 3),
        "workers": ("int", 1),
        "seed": ("int", REQUIRED),
        "out": ("str", "."),
    },
}


# ---------------------------------------------------------------------------
# configuration plumbing


def _parse_items(field, cast, value):
    if isinstance(value, (list, tuple)):
        items = list(value)
    else:
        items = [part.strip() for part in str(value).split(",")
                 if part.strip() != ""]
    try:
        parsed = tuple(cast(item) for item in items)
    except (TypeError, ValueError):
        raise ConfigError(
            f"field '{field}' expects a comma separated list, got {value!r}")
    if not parsed:
        raise ConfigError(f"field '{field}' must not be empty")
    return parsed


def _coerce(field, kind, value):
    if kind == "int_list":
        return _parse_items(field, int, value)
    if kind == "float_list":
        return _parse_items(field, float, value)
    try:
        if kind == "int":
            if isinstance(value, bool):
                raise ValueError
            return int(value)
        if kind == "float":
            return float(value)
        if kind == "str":
            return str(value)
        if kind == "bool":
            if isinstance(value, bool):
                return value
            raise ValueError
    except (TypeError, ValueError):
        raise ConfigError(f"field '{field}' has an invalid value: {value!r}")
    raise AssertionError(f"unknown kind {kind!r}")


def _load_config_file(path, schema):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"field 'config': cannot read {path!r} ({exc})")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"field 'config': {path!r} is not valid JSON ({exc})")
    if not isinstance(data, dict):
        raise ConfigError(f"field 'config': {path!r} must hold a JSON object")
    for key in data:
        if key not in schema:
            raise ConfigError(f"unknown field '{key}' in config file {path!r}")
    return data


def resolve_config(command, args):
    """Merge defaults, the optional config file, and explicit flags."""
    schema = SCHEMAS[command]
    file_values = (_load_config_file(args.config, schema)
                   if args.config else {})
    cfg = {}
    for field, (kind, default) in schema.items():
        value = getattr(args, field)
        if value is None and field in file_values:
            value = file_values[field]
        if value is None:
            if default is REQUIRED:
                raise ConfigError(f"missing required field '{field}'")
            cfg[field] = default
        else:
            cfg[field] = _coerce(field, kind, value)
    return cfg


def _check(condition, message):
    if not condition:
        raise ConfigError(message)


# ---------------------------------------------------------------------------
# output files


def _format_cell(value):
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(value) for value in row])


def _jsonable(value):
    if isinstance(value, tuple):
        return list(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def write_metadata(path, command, parameters):
    meta = {
        "command": command,
        "seed": parameters["seed"],
        "parameters": {key: _jsonable(val) for key, val in parameters.items()},
        "versions": {
            "python": ".".join(str(v) for v in sys.version_info[:3]),
            "numpy": np.__version__,
            "matplotlib": matplotlib.__version__,
            "lculab": __version__,
        },
    }
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _emit(command, cfg, header, rows, draw, extra_params=None):
    out_dir = Path(cfg["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    base = command.replace("-", "_")
    write_csv(out_dir / f"{base}.csv", header, rows)
    params = dict(cfg)
    if extra_params:
        params.update(extra_params)
    write_metadata(out_dir / f"{base}.json", command, params)
    draw(out_dir / f"{base}.png")


# ---------------------------------------------------------------------------
# subcommand handlers; each returns (header, rows, draw, extra_params)


def _run_resnet_variance(cfg):
    _check(all(n >= 2 for n in cfg["qubits"]),
           "field 'qubits' entries must be >= 2")
    _check(cfg["samples"] >= 50, "field 'samples' must be >= 50")
    _check(cfg["sublayers"] >= 1, "field 'sublayers' must be >= 1")
    results = plateau_experiment(PlateauConfig(
        n_list=cfg["qubits"], samples=cfg["samples"],
        sublayers_w1=cfg["sublayers"], sublayers_w2=cfg["sublayers"],
        seed=cfg["seed"], residual=cfg["residual"]))
    ns = sorted(results)
    rows = [(n, results[n]["grad_variance"],
             results[n]["mean_abs_nonunitary"], cfg["samples"], cfg["seed"])
            for n in ns]
    label = "residual" if cfg["residual"] else "no residual"
    variances = [results[n]["grad_variance"] for n in ns]

    def draw(path):
        save_line_plot(path, ns, {label: variances}, "qubits",
                       "gradient variance", logy=True)

    return (("n", "variance", "mean_abs_nonunitary", "samples", "seed"),
            rows, draw, None)


def _run_resnet_ensemble(cfg):
    _check(1 <= cfg["layers"] <= 6, "field 'layers' must lie in 1..6")
    _check(cfg["qubits"] >= 1, "field 'qubits' must be >= 1")
    _check(0.0 < cfg["beta"] < 1.0,
           "field 'beta' must lie strictly inside (0, 1)")
    layers, w0 = build_uniform_ensemble(
        cfg["layers"], haar_sublayer_factory(cfg["qubits"]), cfg["seed"],
        beta=cfg["beta"])
    terms = expand_ensemble(layers, w0)
    rows = [(index, depth, coeff)
            for index, (coeff, depth, _) in enumerate(terms)]
    depths = [depth for _, depth, _ in rows]
    coeffs = [coeff for _, _, coeff in rows]

    def draw(path):
        save_bar_plot(path, depths, coeffs, "sublayer depth",
                      "ensemble coefficient")

    return ("term", "depth", "coefficient"), rows, draw, None


def _run_resnet_attempts(cfg):
    _check(cfg["layers"] >= 1, "field 'layers' must be >= 1")
    _check(cfg["qubits"] >= 1, "field 'qubits' must be >= 1")
    _check(all(0.0 < b < 1.0 for b in cfg["betas"]),
           "field 'betas' entries must lie strictly inside (0, 1)")
    attempts = [ensemble_expected_attempts(cfg["layers"], beta, cfg["qubits"],
                                           cfg["seed"])
                for beta in cfg["betas"]]
    rows = list(zip(cfg["betas"], attempts))

    def draw(path):
        save_line_plot(path, cfg["betas"], {"expected attempts": attempts},
                       "residual strength", "expected attempts")

    return ("beta", "expected_attempts"), rows, draw, None


def _run_pool_verify(cfg):
    _check(cfg["size"] >= 2, "field 'size' must be >= 2")
    _check(cfg["d"] >= 1, "field 'd' must be >= 1")
    rng = np.random.default_rng(cfg["seed"])
    img = ImageGrid(rng.uniform(0.0, 1.0, size=(cfg["size"], cfg["size"])))
    rows = []
    shown = None
    for mode in ("periodic", "zero_padded"):
        spec = PoolingSpec(cfg["d"], mode)
        outcome, reference = pool_image(img, spec)
        if mode == "periodic":
            got = outcome.post_state.amps
            shown = reference.pixels
        else:
            got = encoded_block(outcome.post_state,
                                reference.n_side).reshape(-1)
        want = reference.pixels.reshape(-1)
        got = got / np.linalg.norm(got)
        want = want / np.linalg.norm(want)
        error = float(np.max(np.abs(got - want)))
        direct = pooling_success_probability(img, spec)
        rows.append((cfg["size"], cfg["d"], mode, error,
                     abs(outcome.pi_success - direct), direct))

    def draw(path):
        save_image_pair(path, img.pixels, shown, "input",
                        f"pooled (d={cfg['d']})")

    return (("size", "d", "mode", "max_amplitude_error", "probability_error",
             "success_probability"), rows, draw, None)


def _run_pool_sweep(cfg):
    _check(cfg["images"] >= 1, "field 'images' must be >= 1")
    _check(all(d >= 1 for d in cfg["d_list"]),
           "field 'd_list' entries must be >= 1")
    _check(all(n >= 2 for n in cfg["n_list"]),
           "field 'n_list' entries must be >= 2")
    _check(cfg["d_for_n"] >= 1, "field 'd_for_n' must be >= 1")
    directory = cfg["mnist_dir"] or os.environ.get("MNIST_DIR")
    if directory:
        try:
            images = load_mnist_images(directory, limit=cfg["images"])
            source = f"idx files in {directory}"
        except (OSError, ValueError) as exc:
            raise ConfigError(
                f"field 'mnist_dir': cannot load images from "
                f"{directory!r} ({exc})")
    else:
        images = synthetic_digit_images(cfg["images"], seed=cfg["seed"])
        source = "synthetic"
    sweep = mnist_probability_sweep(images, d_values=cfg["d_list"],
                                    n_values=cfg["n_list"],
                                    d_for_n=cfg["d_for_n"])
    rows = [(kind, value, mean, std, count)
            for kind, value, mean, std, count in sweep]
    d_rows = [row for row in rows if row[0] == "D"]
    n_rows = [row for row in rows if row[0] == "N"]

    def draw(path):
        panels = []
        if d_rows:
            panels.append(([r[1] for r in d_rows], [r[2] for r in d_rows],
                           [r[3] for r in d_rows], "window side D"))
        if n_rows:
            panels.append(([r[1] for r in n_rows], [r[2] for r in n_rows],
                           [r[3] for r in n_rows], "image side N"))
        save_sweep_panels(path, panels, "mean success probability")

    return (("sweep", "value", "mean_success", "std_success", "images"),
            rows, draw, {"image_source": source})


_GROUP_DEGREES = {"s2": 2, "s3": 3, "s4": 4}


def _run_project_verify(cfg):
    _check(cfg["group"] in _GROUP_DEGREES,
           "field 'group' must be one of s2, s3, s4")
    _check(cfg["cases"] >= 1, "field 'cases' must be >= 1")
    _check(cfg["via"] in ("element", "class"),
           "field 'via' must be 'element' or 'class'")
    degree = _GROUP_DEGREES[cfg["group"]]
    group = symmetric_group(degree)
    rep = qudit_permutation_rep(degree)
    build = (build_projection_program if cfg["via"] == "element"
             else conjugacy_class_program)
    rows = []
    for case in range(cfg["cases"]):
        rng = np.random.default_rng((cfg["seed"], case))
        weights = ProjectionWeights(rng.uniform(0.25, 1.0, group.n_classes))
        amps = (rng.standard_normal(2 ** degree)
                + 1j * rng.standard_normal(2 ** degree))
        psi = Statevector(amps / np.linalg.norm(amps))
        direct = np.zeros_like(psi.amps)
        for r in range(group.n_classes):
            direct += weights.a[r] * apply_projector(rep, r, psi)[0]
        outcome = run_lcu(build(rep, weights), psi)
        state_error = float(np.max(np.abs(
            outcome.post_state.amps - direct / np.linalg.norm(direct))))
        formula = projection_success_probability(
            group, weights, subspace_weights(rep, psi))
        rows.append((cfg["group"], case, cfg["via"], state_error,
                     abs(outcome.pi_success - formula), formula))

    def draw(path):
        save_error_plot(path, {"state": [row[3] for row in rows],
                               "probability": [row[4] for row in rows]},
                        "max deviation from direct projection")

    return (("group", "case", "via", "state_error", "probability_error",
             "success_probability"), rows, draw, None)


def _run_rotinv_overlap(cfg):
    _check(cfg["clouds"] >= 1, "field 'clouds' must be >= 1")
    _check(cfg["angles"] >= 2, "field 'angles' must be >= 2")
    rows = rotational_invariance_experiment(cfg["clouds"], cfg["angles"],
                                            cfg["seed"])
    table = np.array([row[1:] for row in rows], dtype=float)
    per_cloud = table.reshape(cfg["clouds"], cfg["angles"], 3)
    thetas = per_cloud[0, :, 0]

    def draw(path):
        save_line_plot(path, thetas,
                       {"invariant encoding": per_cloud[:, :, 1].mean(axis=0),
                        "raw encoding": per_cloud[:, :, 2].mean(axis=0)},
                       "rotation angle", "mean state overlap")

    return (("cloud_id", "theta", "overlap_invariant", "overlap_raw"),
            rows, draw, None)


def _run_alpha_sweep(cfg):
    _check(all(0.0 <= a <= 1.0 for a in cfg["alphas"]),
           "field 'alphas' entries must lie in [0, 1]")
    _check(cfg["repetitions"] >= 1, "field 'repetitions' must be >= 1")
    _check(cfg["samples"] >= 5, "field 'samples' must be >= 5")
    _check(cfg["points"] >= 2, "field 'points' must be >= 2")
    _check(cfg["workers"] >= 1, "field 'workers' must be >= 1")
    rows = alpha_sweep_experiment(AlphaSweepConfig(
        alphas=cfg["alphas"], n_repetitions=cfg["repetitions"],
        n_samples=cfg["samples"], n_points=cfg["points"],
        master_seed=cfg["seed"], workers=cfg["workers"]))

    def draw(path):
        save_alpha_sweep_plot(path, [row[0] for row in rows],
                              [row[1] for row in rows],
                              [row[2] for row in rows],
                              [row[3] for row in rows])

    return (("alpha", "mean_accuracy", "std_accuracy",
             "mean_effective_dimension"), rows, draw, None)


HANDLERS = {
    "resnet-variance": _run_resnet_variance,
    "resnet-ensemble": _run_resnet_ensemble,
    "resnet-attempts": _run_resnet_attempts,
    "pool-verify": _run_pool_verify,
    "pool-sweep": _run_pool_sweep,
    "project-verify": _run_project_verify,
    "rotinv-overlap": _run_rotinv_overlap,
    "alpha-sweep": _run_alpha_sweep,
}


# ---------------------------------------------------------------------------
# argument parsing and entry point


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lculab",
        description="experiment reports; each writes CSV, JSON metadata, "
                    "and a PNG figure")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command, schema in SCHEMAS.items():
        sub = subparsers.add_parser(command)
        sub.add_argument("--config", default=None,
                         help="JSON file with default field values")
        for field, (kind, default) in schema.items():
            flag = "--" + field.replace("_", "-")
            if kind == "bool":
                sub.add_argument("--no-" + field.replace("_", "-"),
                                 dest=field, action="store_const",
                                 const=False, default=None)
            else:
                shown = "required" if default is REQUIRED else repr(default)
                sub.add_argument(flag, default=None,
                                 help=f"{kind} (default: {shown})")
    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed usage; -h exits 0, errors exit 2
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args.command, args)
        header, rows, draw, extra = HANDLERS[args.command](cfg)
        _emit(args.command, cfg, header, rows, draw, extra)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (AssertionError, PostSelectionImpossible,
            np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


def main():
    raise SystemExit(run_cli())


if __name__ == "__main__":
    main()
