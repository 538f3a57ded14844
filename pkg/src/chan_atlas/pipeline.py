"""End-to-end analysis pipeline producing a JSON-ready report.

Stages: CPTP verification, image decomposition, classification (CQ / eCQ /
entanglement breaking / universal image additivity), minimal output
entropies, fixed-point structure (square channels), and an image-additivity
probe against the identity channel.  A stage that cannot run records a
status of ``skipped`` or ``error`` with a reason; the pipeline itself never
aborts on a verdict.

Reports are deterministic for a fixed seed and package version: stages use
derived seeds only, keys are sorted on serialization, and wall-clock timings
are attached only on request since they break byte-level reproducibility.
"""

from __future__ import annotations

import json
import time

import numpy as np

from . import __version__
from .channels import identity_channel
from .classify import (
    is_cq,
    is_entanglement_breaking,
    is_universally_image_additive,
    reconstruct_ecq,
)
from .entropy import image_additivity_gap, min_output_entropy
from .fixed_points import fixed_point_structure
from .formats import form_kind, matrix_to_json
from .geometry import dimension_bound_check, polytopic_decompose

REPORT_VERSION = "1"

# budget guards for the identity probe; joint spaces grow quadratically
_MAX_JOINT_INPUT = 36
_MAX_JOINT_OUTPUT = 36


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    return x


def run_pipeline(t, seed=0, p_values=(1.0, 2.0), n_directions=400,
                 include_timings=False):
    """Full analysis of one channel; returns the report as a plain dict."""
    report = {
        "report_version": REPORT_VERSION,
        "package_version": __version__,
        "seed": int(seed),
        "channel": {"kind": form_kind(t), "d_in": t.d_in, "d_out": t.d_out},
    }
    timings = {}

    def stage(name, fn):
        t0 = time.perf_counter()
        try:
            out = fn()
        except Exception as e:  # noqa: BLE001 - verdict pipelines report, never abort
            out = {"status": "error", "reason": f"{type(e).__name__}: {e}"}
        timings[name] = time.perf_counter() - t0
        report[name] = _jsonable(out)

    v = t.verify_cptp()
    report["cptp"] = _jsonable({
        "is_cptp": v.is_cptp, "is_cp": v.is_cp, "is_tp": v.is_tp,
        "min_choi_eigenvalue": v.min_choi_eigenvalue,
        "marginal_deviation": v.marginal_deviation,
    })
    if not v.is_cptp:
        reason = "map is not CPTP"
        for name in ("image", "classification", "entropy", "fixed_points",
                     "image_additivity_vs_identity"):
            report[name] = {"status": "skipped", "reason": reason}
        if include_timings:
            report["timings"] = timings
        return report

    stage("image", lambda: _image_stage(t, seed, n_directions))
    stage("classification", lambda: _classification_stage(t, seed, n_directions))
    stage("entropy", lambda: _entropy_stage(t, seed, p_values))
    if t.d_in == t.d_out:
        stage("fixed_points", lambda: _fixed_point_stage(t, seed))
    else:
        report["fixed_points"] = {"status": "skipped",
                                  "reason": "input and output dimensions differ"}
    if (t.d_in * t.d_in <= _MAX_JOINT_INPUT
            and t.d_out * t.d_in <= _MAX_JOINT_OUTPUT):
        stage("image_additivity_vs_identity", lambda: _identity_probe(t, seed))
    else:
        report["image_additivity_vs_identity"] = {
            "status": "skipped", "reason": "joint dimensions exceed the desk-scale budget"}
    if include_timings:
        report["timings"] = _jsonable(timings)
    return report


def _image_stage(t, seed, n_directions):
    dec = polytopic_decompose(t, n_directions=n_directions, seed=seed)
    bound = dimension_bound_check(dec)
    out = {
        "status": dec.verdict,
        "n_vertices": len(dec.vertices),
        "n_dof": dec.n_dof,
        "preimage_dims": [r.preimage_basis.shape[1] for r in dec.vertices],
        "residual_dim": dec.w_basis.shape[1] if dec.w_basis is not None else t.d_in,
        "dimension_bound_ok": bound.ok,
        "vertex_states": [matrix_to_json(r.state) for r in dec.vertices],
    }
    for key in ("max_support_excess", "reconstruction_deviation", "orthogonality_deviation",
                "dominance_deviation"):
        if key in dec.witness:
            out[key] = dec.witness[key]
    seps = dec.witness.get("vertex_separations")
    if seps:
        out["min_vertex_separation"] = min(seps)
    return out


def _classification_stage(t, seed, n_directions, tol=1e-9):
    cq = is_cq(t, seed=seed, n_directions=n_directions)
    eb = is_entanglement_breaking(t, tol=tol)
    uia = is_universally_image_additive(t, seed=seed, n_directions=n_directions)
    out = {
        "cq": {"status": cq.status, "reason": cq.reason},
        "entanglement_breaking": {
            "status": eb.status, "reason": eb.reason,
            "min_pt_eigenvalue": eb.witness.get("min_pt_eigenvalue"),
        },
        "universally_image_additive": {"status": uia.status, "reason": uia.reason},
    }
    dec = polytopic_decompose(t, n_directions=n_directions, seed=seed)
    if dec.verdict == "polytopic" and dec.vertices:
        rec = reconstruct_ecq(t, [r.state for r in dec.vertices],
                              preimages=[r.preimage_basis for r in dec.vertices])
        ecq = {"status": rec.status, "reason": rec.reason}
        if rec.certificate is not None:
            ecq["effect_norms"] = list(rec.certificate.norms)
        out["ecq"] = ecq
    else:
        out["ecq"] = {"status": "indeterminate" if dec.verdict != "not_polytopic" else "no",
                      "reason": f"image decomposition verdict: {dec.verdict}"}
    return out


def _entropy_stage(t, seed, p_values):
    rows = []
    for p in p_values:
        r = min_output_entropy(t, p=p, seed=seed)
        rows.append({"p": float(p), "value": r.value, "converged": r.converged,
                     "grad_norm": r.grad_norm})
    return {"status": "ok", "min_output": rows}


def _fixed_point_stage(t, seed):
    st = fixed_point_structure(t, seed=seed)
    return {
        "status": st.status,
        "reason": st.reason,
        "fixed_dim": st.fixed_dim,
        "support_dim": st.support_dim,
        "blocks": [{"dimension": b.dimension, "multiplicity": b.multiplicity}
                   for b in st.blocks],
    }


def _identity_probe(t, seed):
    rep = image_additivity_gap(t, identity_channel(t.d_in), n_directions=24, seed=seed)
    return {
        "status": "ok",
        "partner": f"identity ({t.d_in})",
        "max_gap": rep.max_gap,
        "lhs": rep.lhs,
        "rhs": rep.rhs,
        "certified_positive": rep.certified,
        "n_directions": rep.n_directions,
    }


def report_json(report):
    """Canonical serialization: sorted keys, two-space indent, newline at end."""
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def validate_report(report):
    """Check a report against the shipped schema.  Needs ``jsonschema``."""
    import jsonschema

    jsonschema.validate(report, load_report_schema())


def load_report_schema():
    from importlib import resources

    with resources.files("chan_atlas").joinpath("schemas/report.schema.json").open(
            "r", encoding="utf-8") as f:
        return json.load(f)
