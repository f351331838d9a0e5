"""Command line frontend: encode, decode, metrics, bench.

Exit codes: 0 success, 2 usage, 3 format (WAV or stream), 4 weights, 5 io.
"""

import argparse
import contextlib
import json
import sys
import time

import numpy as np

from . import bitstream, net
from .losses import mrstft_loss, pm_loss_terms, subband_mrstft_loss
from .pipeline import (align_signals, decode_stream, encode_signal,
                       generate_codec_weights, load_codec_weights)
from .synth import speech_like
from .wavio import UnsupportedWavError, read_wav_mono16, write_wav_mono16

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FORMAT = 3
EXIT_WEIGHTS = 4
EXIT_IO = 5

_MODES = {"wb": bitstream.MODE_WB, "swb": bitstream.MODE_SWB}


def _emit(report: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(report))
    else:
        for key, value in report.items():
            print(f"{key}={value}")


def cmd_encode(args) -> int:
    samples, rate = read_wav_mono16(args.input)
    if rate not in (16000, 32000):
        raise UnsupportedWavError(f"{args.input}: {rate} Hz unsupported "
                                  "(need 16000 or 32000)")
    mode = _MODES[args.mode] if args.mode else (
        bitstream.MODE_SWB if rate == 32000 else bitstream.MODE_WB)
    weights = load_codec_weights(args.weights)
    header, payloads = encode_signal(samples, weights, mode, rate)
    with open(args.output, "wb") as sink:
        count = bitstream.write_stream(header, payloads, sink)
    duration = len(samples) / rate if len(samples) else 0.0
    bitrate = bitstream.FRAME_BYTES[mode] * 8 * 50
    _emit({"frames": count, "bitrate_bps": bitrate,
           "mode": "swb" if mode == bitstream.MODE_SWB else "wb",
           "duration_s": round(duration, 6), "output": args.output}, args.json)
    return EXIT_OK


def cmd_decode(args) -> int:
    weights = load_codec_weights(args.weights)
    with open(args.input, "rb") as source:
        header, frame_iter = bitstream.read_stream(source)
        payloads = []
        try:
            for payload in frame_iter:
                payloads.append(payload)
        except bitstream.TruncatedStreamError as exc:
            print(f"warning: {args.input}: stream truncated inside frame "
                  f"{exc.frames_read}; decoding {exc.frames_read} frames",
                  file=sys.stderr)
    samples, rate = decode_stream(header, payloads, weights,
                                  postfilter=not args.no_postfilter)
    write_wav_mono16(args.output, samples, rate)
    _emit({"frames": len(payloads), "sample_rate": rate,
           "samples": len(samples), "output": args.output}, args.json)
    return EXIT_OK


def cmd_metrics(args) -> int:
    ref, ref_rate = read_wav_mono16(args.ref)
    deg, deg_rate = read_wav_mono16(args.deg)
    if ref_rate != deg_rate:
        raise UnsupportedWavError(
            f"sample rate mismatch: {ref_rate} vs {deg_rate}")
    ref, deg = align_signals(ref, deg)
    if len(ref) < 2048:
        raise UnsupportedWavError("aligned signals shorter than 2048 samples")
    spec_term, valley_term = pm_loss_terms(ref, deg)
    _emit({
        "mrstft": round(mrstft_loss(ref, deg), 8),
        "subband_mrstft": round(subband_mrstft_loss(ref, deg), 8),
        "pm": round(spec_term + valley_term, 8),
        "pm_erb": round(spec_term, 8),
        "pm_valley": round(valley_term, 8),
        "samples": len(ref),
    }, args.json)
    return EXIT_OK


def _single_thread():
    try:
        from threadpoolctl import threadpool_limits
        return threadpool_limits(limits=1)
    except ImportError:
        return contextlib.nullcontext()


def cmd_bench(args) -> int:
    weights = (load_codec_weights(args.weights) if args.weights
               else generate_codec_weights(seed=0))
    duration = max(args.duration, 10.0)
    x = speech_like(duration, 32000, seed=7)
    enc_times, dec_times = [], []
    with _single_thread():
        header, payloads = encode_signal(x, weights, bitstream.MODE_SWB, 32000)
        for _ in range(args.runs):
            t0 = time.perf_counter()
            encode_signal(x, weights, bitstream.MODE_SWB, 32000)
            enc_times.append(time.perf_counter() - t0)
        for _ in range(args.runs):
            t0 = time.perf_counter()
            decode_stream(header, payloads, weights)
            dec_times.append(time.perf_counter() - t0)
    report = {
        "duration_s": duration,
        "rtf_encode": round(float(np.median(enc_times)) / duration, 5),
        "rtf_decode": round(float(np.median(dec_times)) / duration, 5),
        "runs": args.runs,
    }
    if args.json:
        report["encode_times_s"] = [round(t, 4) for t in enc_times]
        report["decode_times_s"] = [round(t, 4) for t in dec_times]
    _emit(report, args.json)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swbcodec",
        description="Hybrid super-wideband speech codec (6 kbps WB / 8 kbps SWB)")
    sub = parser.add_subparsers(dest="command", required=True)

    enc = sub.add_parser("encode", help="WAV -> .pgna stream")
    enc.add_argument("--in", dest="input", required=True, metavar="WAV")
    enc.add_argument("--out", dest="output", required=True, metavar="PGNA")
    enc.add_argument("--mode", choices=sorted(_MODES), default=None,
                     help="default: swb for 32 kHz input, wb for 16 kHz")
    enc.add_argument("--weights", required=True,
                     help="directory with encoder.pgwt / decoder.pgwt")
    enc.add_argument("--json", action="store_true")
    enc.set_defaults(run=cmd_encode)

    dec = sub.add_parser("decode", help=".pgna stream -> WAV")
    dec.add_argument("--in", dest="input", required=True, metavar="PGNA")
    dec.add_argument("--out", dest="output", required=True, metavar="WAV")
    dec.add_argument("--weights", required=True)
    dec.add_argument("--no-postfilter", action="store_true",
                     help="disable the harmonic postfilter (A/B runs)")
    dec.add_argument("--json", action="store_true")
    dec.set_defaults(run=cmd_decode)

    met = sub.add_parser("metrics", help="spectral metrics between two WAVs")
    met.add_argument("ref", metavar="REF.wav")
    met.add_argument("deg", metavar="DEG.wav")
    met.add_argument("--json", action="store_true")
    met.set_defaults(run=cmd_metrics)

    ben = sub.add_parser("bench", help="real-time factor benchmark")
    ben.add_argument("--weights", default=None,
                     help="weights directory (default: seeded random weights)")
    ben.add_argument("--duration", type=float, default=10.0,
                     help="synthetic input length in seconds (min 10)")
    ben.add_argument("--runs", type=int, default=5)
    ben.add_argument("--json", action="store_true")
    ben.set_defaults(run=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except (UnsupportedWavError, bitstream.FramingError,
            bitstream.StreamFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except net.WeightsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_WEIGHTS
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
