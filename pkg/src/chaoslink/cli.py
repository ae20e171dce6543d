"""Command-line interface: simulation, analysis, and file-link commands.

Configuration comes from an optional flat dotted-key file (``key = value``
per line, ``#`` comments) overridden by command-line flags. All stochastic
commands require a seed so every output is reproducible; outputs embed their
full configuration.

Exit codes: 0 success, 2 validation error, 3 runtime/convergence failure,
4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__, analysis
from .codecs import PacketCorruptionError, bits_to_packet, decompress_audio, decompress_image, packet_to_bits, read_pgm, read_wav, write_pgm, write_wav, compress_audio, compress_image
from .core_map import DegenerateTrajectoryError, generate_trajectory
from .io_formats import (
    read_masked_series,
    write_csv,
    write_json_report,
    write_masked_series,
    write_trajectory_csv,
    write_trajectory_dump,
)
from .link import (
    ModulationConfig,
    UnstableCouplingError,
    ber_measure,
    ber_predict,
    ber_sweep,
    integrate_and_dump,
    mask_transmit,
    optimal_threshold,
    prbs,
    run_link,
    unmask_receive,
)
from .params import SettlingConfig, SystemParams
from .sync import CouplingConfig, fit_deviation_model, run_sync, stability_check, sync_sweep

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3
EXIT_IO = 4

DEFAULTS = {
    "map.a": -4.0 / 3.0,
    "map.b": 1.0,
    "map.c": 1.0 / 3.0,
    "map.beta": 0.5,
    "map.gamma": -1.0,
    "run.n": 10000,
    "run.transient": 1000,
    "link.amplitude": 0.1,
    "link.samples_per_bit": 50,
    "link.f_clk": 0.5e6,
    "link.bit_rate": 1.0e4,
    "link.noise_sigma": 0.0,
    "link.mismatch": 0.0,
    "codec.keep_fraction": 0.22,
    "codec.selection": "lowfreq",
    "codec.value_bits": 8,
}


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def load_config(path) -> dict:
    """Parse a flat dotted-key config file into a dict."""
    config = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CliError(
                f"{path}:{lineno}: expected 'key = value'", EXIT_VALIDATION
            )
        key, _, raw = line.partition("=")
        raw = raw.strip()
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        config[key.strip()] = value
    return config


class Settings:
    """Layered configuration: defaults, then config file, then CLI flags."""

    def __init__(self, args):
        self.values = dict(DEFAULTS)
        if args.config:
            try:
                self.values.update(load_config(args.config))
            except OSError as exc:
                raise CliError(f"cannot read config: {exc}", EXIT_IO)
        for key, value in vars(args).items():
            dotted = key.replace("__", ".")
            if "." in dotted and value is not None:
                self.values[dotted] = value
        self.args = args

    def __getitem__(self, key):
        return self.values[key]

    def params(self) -> SystemParams:
        try:
            return SystemParams(
                a=float(self["map.a"]),
                b=float(self["map.b"]),
                c=float(self["map.c"]),
                beta=float(self["map.beta"]),
                gamma=float(self["map.gamma"]),
            )
        except ValueError as exc:
            raise CliError(str(exc), EXIT_VALIDATION)

    def modulation(self) -> ModulationConfig:
        try:
            return ModulationConfig(
                amplitude=float(self["link.amplitude"]),
                samples_per_bit=int(self["link.samples_per_bit"]),
                f_clk=float(self["link.f_clk"]),
                bit_rate=float(self["link.bit_rate"]),
            )
        except ValueError as exc:
            raise CliError(str(exc), EXIT_VALIDATION)

    def seed(self) -> int:
        if self.args.seed is None:
            raise CliError("--seed is required for stochastic commands", EXIT_VALIDATION)
        return self.args.seed

    def echo(self) -> dict:
        return {
            "version": __version__,
            "config": {k: self.values[k] for k in sorted(self.values)},
            "seed": self.args.seed,
        }


def _parse_grid(text: str):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise CliError(f"cannot parse grid {text!r}", EXIT_VALIDATION)


def _out_path(settings, default_name: str) -> Path:
    out_dir = Path(settings.args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create output directory: {exc}", EXIT_IO)
    return out_dir / default_name


def cmd_map(settings: Settings) -> int:
    params = settings.params()
    seed = settings.seed()
    settling = None
    if settings.args.t_n is not None:
        settling = SettlingConfig(t_n=settings.args.t_n)
    traj = generate_trajectory(
        int(settings["run.n"]),
        params=params,
        seed=seed,
        settling=settling,
        transient=int(settings["run.transient"]),
    )
    csv_path = _out_path(settings, "trajectory.csv")
    write_trajectory_csv(csv_path, traj)
    dump_path = _out_path(settings, "trajectory.bin")
    write_trajectory_dump(dump_path, traj)
    print(f"wrote {csv_path} and {dump_path} ({len(traj)} states)")
    return EXIT_OK


def cmd_lyapunov(settings: Settings) -> int:
    params = settings.params()
    method = settings.args.method
    meta = settings.echo()
    if method == "analytic":
        # the closed form exists only for the constant-slope folds and is the
        # same for beta 0 and 1, so evaluate it there for any configured beta
        if params.beta not in (0.0, 1.0):
            params = params.replace(beta=0.0)
        spectrum = analysis.le_analytic(params)
        print(
            "analytic exponents: "
            + ", ".join(f"{v:.6f}" for v in spectrum.exponents)
        )
        path = _out_path(settings, "lyapunov_analytic.csv")
        write_csv(
            path,
            ["method", "lambda1", "lambda2", "lambda3"],
            [["analytic", *spectrum.exponents]],
            meta,
        )
        print(f"wrote {path}")
        return EXIT_OK

    seed = settings.seed()
    n = int(settings["run.n"])
    if method in ("qr", "er", "wolf"):
        traj = generate_trajectory(n, params=params, seed=seed)
        if method == "qr":
            spectrum = analysis.le_qr(traj)
        elif method == "er":
            spectrum = analysis.le_eckmann_ruelle(traj.states)
        else:
            spectrum = analysis.le_wolf(traj.states)
        print(f"{method} exponents: " + ", ".join(f"{v:.6f}" for v in spectrum.exponents))
        path = _out_path(settings, f"lyapunov_{method}.csv")
        write_csv(
            path,
            ["method", *[f"lambda{k+1}" for k in range(len(spectrum.exponents))]],
            [[method, *spectrum.exponents]],
            meta,
        )
        print(f"wrote {path}")
        return EXIT_OK

    if method == "beta-sweep":
        betas = np.linspace(0.0, 1.0, int(settings.args.points))
        rows = []
        for beta in betas:
            traj = generate_trajectory(
                n, params=params.replace(beta=float(beta)), seed=seed
            )
            qr = analysis.le_qr(traj)
            er = analysis.le_eckmann_ruelle(traj.states)
            wolf = analysis.le_wolf(traj.states)
            rows.append([beta, "qr", *qr.exponents])
            rows.append([beta, "eckmann-ruelle", *er.exponents])
            rows.append([beta, "wolf", wolf.exponents[0], "", ""])
        path = _out_path(settings, "lyapunov_beta_sweep.csv")
        write_csv(path, ["beta", "method", "lambda1", "lambda2", "lambda3"], rows, meta)
        print(f"wrote {path}")
        return EXIT_OK

    # settling sweep
    grid = _parse_grid(settings.args.t_n_grid)
    rows = []
    for t_n, spectrum in analysis.le_vs_settling(params, grid, n=n, seed=seed):
        rows.append([t_n, *spectrum.exponents])
    path = _out_path(settings, "lyapunov_settling.csv")
    write_csv(path, ["t_n", "lambda1", "lambda2", "lambda3"], rows, meta)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_sync(settings: Settings) -> int:
    params = settings.params()
    seed = settings.seed()
    n = int(settings["run.n"])
    meta = settings.echo()
    mode = settings.args.mode
    sigmas = _parse_grid(settings.args.sigmas)
    if mode == "sigma":
        coupling_gamma = float(settings["map.gamma"])
        rows = []
        dev_points = []
        for k, sigma in enumerate(sigmas):
            run = run_sync(
                params,
                CouplingConfig(gamma=coupling_gamma, noise_sigma=sigma),
                n=n,
                seed=seed + k,
            )
            rows.append([sigma, *run.rms_error, *run.correlation, run.delta_n])
            dev_points.append((sigma, run.delta_n))
        path = _out_path(settings, "sync_sigma.csv")
        write_csv(
            path,
            ["sigma", "rms_x", "rms_y", "rms_z", "corr_x", "corr_y", "corr_z", "delta_n"],
            rows,
            meta,
        )
        fit = fit_deviation_model(dev_points)
        report = _out_path(settings, "sync_deviation_fit.json")
        write_json_report(
            report,
            {**meta, "fit": asdict(fit)},
        )
        print(f"wrote {path} and {report}")
        return EXIT_OK

    gammas = _parse_grid(settings.args.gammas)
    points = sync_sweep(
        params, gammas, sigmas, n=n, seed=seed, max_workers=settings.args.threads
    )
    rows = [
        [p["gamma"], p["sigma"], *p["run"].rms_error]
        for p in points
    ]
    path = _out_path(settings, "sync_grid.csv")
    write_csv(path, ["gamma", "sigma", "rms_x", "rms_y", "rms_z"], rows, meta)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_ber(settings: Settings) -> int:
    params = settings.params()
    seed = settings.seed()
    cfg = settings.modulation()
    meta = settings.echo()
    mode = settings.args.mode
    n_bits = int(settings.args.bits)
    noise = float(settings["link.noise_sigma"])
    mismatch = float(settings["link.mismatch"])

    if mode == "sweep":
        amplitudes = _parse_grid(settings.args.amplitudes)
        results = ber_sweep(
            params,
            amplitudes,
            cfg,
            n_bits=n_bits,
            seed=seed,
            noise_sigma=noise,
            mismatch=mismatch,
            max_workers=settings.args.threads,
        )
        rows = [
            [
                r.amplitude,
                r.measured_ber,
                r.confidence_interval[0],
                r.confidence_interval[1],
                r.predicted_ber,
                r.errors,
                r.bits,
            ]
            for r in results
        ]
        path = _out_path(settings, "ber_amplitude.csv")
        write_csv(
            path,
            ["amplitude", "ber", "ci_low", "ci_high", "predicted_ber", "errors", "bits"],
            rows,
            meta,
        )
        print(f"wrote {path}")
        return EXIT_OK

    bits = prbs(n_bits, seed=(seed % ((1 << 23) - 1)) + 1)
    values, fitted, threshold, decisions = run_link(
        params, bits, cfg, seed=seed, noise_sigma=noise, mismatch=mismatch,
        filtered=not settings.args.unfiltered,
    )
    if mode == "histogram":
        edges = np.histogram_bin_edges(values, bins=settings.args.bins)
        rows = []
        for cls in (0, 1):
            counts, _ = np.histogram(values[fitted.labels == cls], bins=edges)
            for lo, hi, count in zip(edges[:-1], edges[1:], counts):
                rows.append([cls, lo, hi, int(count)])
        path = _out_path(settings, "symbol_histogram.csv")
        write_csv(path, ["bit", "bin_low", "bin_high", "count"], rows, meta)
        report = _out_path(settings, "symbol_stats.json")
        write_json_report(
            report,
            {
                **meta,
                "mu0": fitted.mu0,
                "sigma0": fitted.sigma0,
                "mu1": fitted.mu1,
                "sigma1": fitted.sigma1,
                "p0": fitted.p0,
                "p1": fitted.p1,
                "optimal_threshold": threshold,
                "measured_ber": ber_measure(bits, decisions).measured_ber,
            },
        )
        print(f"wrote {path} and {report}")
        return EXIT_OK

    # threshold scan
    grid = np.linspace(fitted.mu0, fitted.mu1, settings.args.bins)
    rows = [[lam, float(ber_predict(fitted, lam))] for lam in grid]
    lam_opt, ber_opt = optimal_threshold(fitted)
    path = _out_path(settings, "threshold_scan.csv")
    write_csv(path, ["threshold", "predicted_ber"], rows, meta)
    report = _out_path(settings, "threshold_optimum.json")
    write_json_report(report, {**meta, "lambda_opt": lam_opt, "ber_opt": ber_opt})
    print(f"wrote {path} and {report}")
    return EXIT_OK


def cmd_send_file(settings: Settings) -> int:
    params = settings.params()
    seed = settings.seed()
    cfg = settings.modulation()
    payload = Path(settings.args.input)
    suffix = payload.suffix.lower()
    keep = float(settings["codec.keep_fraction"])
    selection = str(settings["codec.selection"])
    value_bits = int(settings["codec.value_bits"])
    try:
        if suffix == ".wav":
            packet = compress_audio(
                read_wav(payload), keep, selection=selection, value_bits=value_bits
            )
        elif suffix == ".pgm":
            packet = compress_image(
                read_pgm(payload), keep, selection=selection, value_bits=value_bits
            )
        else:
            raise CliError(f"unsupported payload {suffix!r}", EXIT_VALIDATION)
    except OSError as exc:
        raise CliError(f"cannot read payload: {exc}", EXIT_IO)
    bits = packet_to_bits(packet)
    masked = mask_transmit(params, bits, cfg, seed=seed)
    out = Path(settings.args.output)
    write_masked_series(out, masked)
    report = _out_path(settings, "send_report.json")
    write_json_report(
        report,
        {
            **settings.echo(),
            "payload": str(payload),
            "masked_series": str(out),
            "payload_bits": int(bits.size),
            "samples": int(masked.w_star.size),
            "compression_ratio": packet.compression_ratio,
        },
    )
    print(f"wrote {out} ({masked.w_star.size} samples) and {report}")
    return EXIT_OK


def cmd_recv_file(settings: Settings) -> int:
    seed = settings.seed()
    try:
        masked = read_masked_series(settings.args.input)
    except OSError as exc:
        raise CliError(f"cannot read masked series: {exc}", EXIT_IO)
    noise = float(settings["link.noise_sigma"])
    received = masked.w_star
    if noise > 0:
        from .link import channel_awgn

        received = channel_awgn(received, noise, seed=seed + 1)
    cfg = masked.config
    n_symbols = (received.size - masked.preamble_samples) // cfg.samples_per_bit
    recovered = unmask_receive(masked, received=received, seed=seed)
    symbol_means = integrate_and_dump(
        recovered[: n_symbols * cfg.samples_per_bit], cfg
    )
    bits = (symbol_means > 0.0).astype(np.uint8)
    packet = bits_to_packet(bits)  # raises PacketCorruptionError on CRC failure
    out = Path(settings.args.output)
    if packet.kind == "audio":
        write_wav(out, decompress_audio(packet))
    else:
        write_pgm(out, decompress_image(packet))
    report = _out_path(settings, "recv_report.json")
    write_json_report(
        report,
        {
            **settings.echo(),
            "masked_series": str(settings.args.input),
            "recovered": str(out),
            "payload_kind": packet.kind,
            "payload_bits": int(bits.size),
            "compression_ratio": packet.compression_ratio,
        },
    )
    print(f"wrote {out} and {report}")
    return EXIT_OK


def cmd_selftest(settings: Settings) -> int:
    """Fast internal checks of the main numerical claims."""
    failures = 0

    def check(name, ok, detail=""):
        nonlocal failures
        status = "PASS" if ok else "FAIL"
        print(f"[{status}] {name}" + (f" ({detail})" if detail else ""))
        failures += 0 if ok else 1

    params = SystemParams()
    spectrum = analysis.le_analytic(params.replace(beta=0.0))
    expected = (0.683, 0.302, -0.985)
    check(
        "analytic spectrum",
        all(abs(a - b) < 1e-3 for a, b in zip(spectrum.exponents, expected)),
        ", ".join(f"{v:.3f}" for v in spectrum.exponents),
    )
    check("default coupling stable", stability_check(params)["stable"])
    bits = prbs(2000, seed=7)
    _, fitted, threshold, decisions = run_link(
        params, bits, settings.modulation(), seed=11
    )
    result = ber_measure(bits, decisions)
    check("noiseless link", result.errors == 0, f"ber={result.measured_ber:.1e}")
    from .signals import synth_speech

    clip = synth_speech(duration=0.5, seed=1)
    packet = compress_audio(clip, 0.22)
    rebuilt = bits_to_packet(packet_to_bits(packet))
    check(
        "packet round trip",
        all(np.array_equal(a, b) for a, b in zip(rebuilt.values, packet.values)),
    )
    return EXIT_OK if failures == 0 else EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat dotted-key config file")
    common.add_argument("--seed", type=int, help="master seed (required for stochastic commands)")
    common.add_argument("--out-dir", default=".", help="directory for output artifacts")
    common.add_argument("--threads", type=int, default=1, help="worker cap for sweeps")
    for key in DEFAULTS:
        flag = "--" + key.replace(".", "-").replace("_", "-")
        common.add_argument(flag, dest=key.replace(".", "__"), default=None)

    parser = argparse.ArgumentParser(
        prog="chaoslink",
        description="Synchronized hyperchaotic maps and chaotic-masking communication",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_map = sub.add_parser(
        "map", parents=[common], help="simulate a trajectory, write CSV + binary dump"
    )
    p_map.add_argument("--t-n", type=float, default=None, help="settling hold time (non-ideal mode)")
    p_map.set_defaults(handler=cmd_map)

    p_le = sub.add_parser("lyapunov", parents=[common], help="Lyapunov spectra and sweeps")
    p_le.add_argument(
        "--method",
        choices=["analytic", "qr", "er", "wolf", "beta-sweep", "settling-sweep"],
        default="qr",
    )
    p_le.add_argument("--points", type=int, default=21, help="beta sweep resolution")
    p_le.add_argument(
        "--t-n-grid", default="0.8,1.5,2,3,5,7.37", help="settling sweep grid"
    )
    p_le.set_defaults(handler=cmd_lyapunov)

    p_sync = sub.add_parser("sync", parents=[common], help="synchronization metrics")
    p_sync.add_argument("--mode", choices=["sigma", "grid"], default="sigma")
    p_sync.add_argument("--sigmas", default="0,0.01,0.02,0.03,0.04,0.05")
    p_sync.add_argument("--gammas", default="-1.9,-1.6,-1.3,-1.0,-0.7")
    p_sync.set_defaults(handler=cmd_sync)

    p_ber = sub.add_parser("ber", parents=[common], help="link BER tables and histograms")
    p_ber.add_argument("--mode", choices=["sweep", "histogram", "threshold-scan"], default="sweep")
    p_ber.add_argument("--amplitudes", default="0.025,0.05,0.075,0.1")
    p_ber.add_argument("--bits", type=int, default=20000)
    p_ber.add_argument("--bins", type=int, default=81)
    p_ber.add_argument("--unfiltered", action="store_true", help="skip the matched filter")
    p_ber.set_defaults(handler=cmd_ber)

    p_send = sub.add_parser("send-file", parents=[common], help="compress and mask a WAV/PGM payload")
    p_send.add_argument("--input", required=True)
    p_send.add_argument("--output", required=True, help="masked-series binary path")
    p_send.set_defaults(handler=cmd_send_file)

    p_recv = sub.add_parser("recv-file", parents=[common], help="demodulate a masked series into a payload file")
    p_recv.add_argument("--input", required=True, help="masked-series binary path")
    p_recv.add_argument("--output", required=True, help="recovered payload path")
    p_recv.set_defaults(handler=cmd_recv_file)

    p_self = sub.add_parser("selftest", parents=[common], help="fast internal checks")
    p_self.set_defaults(handler=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = Settings(args)
        return args.handler(settings)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (UnstableCouplingError, DegenerateTrajectoryError, PacketCorruptionError, analysis.NoScalingRegionError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
