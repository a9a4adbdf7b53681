"""Report assembly and emission.

Reports are plain nested dicts of primitives so the JSON form is stable:
for a fixed scene, seed and package version the serialized document is
byte-identical.  Discrepancy annotations (stated value vs computed value)
are first-class entries, never silent corrections.
"""

from __future__ import annotations

import json

from .verdicts import FAIL, INCONCLUSIVE, PASS, VACUOUS

REPORT_VERSION = 1


def entry(name: str, residual: float, tol: float, verdict: str, **extra) -> dict:
    e = {"name": name, "residual": float(residual), "tol": float(tol), "verdict": verdict}
    e.update(extra)
    return e


def collect_verdicts(node) -> list[str]:
    """All 'verdict' values in a nested report structure."""
    found: list[str] = []
    if isinstance(node, dict):
        for key, value in node.items():
            if key == "verdict" and isinstance(value, str):
                found.append(value)
            else:
                found.extend(collect_verdicts(value))
    elif isinstance(node, list):
        for item in node:
            found.extend(collect_verdicts(item))
    return found


def summarize(report: dict) -> dict:
    verdicts = collect_verdicts({k: v for k, v in report.items() if k != "summary"})
    return {
        "pass": verdicts.count(PASS),
        "fail": verdicts.count(FAIL),
        "inconclusive": verdicts.count(INCONCLUSIVE),
        "vacuous": verdicts.count(VACUOUS),
    }


def exit_code(report: dict) -> int:
    """0 when no Fail verdicts, 1 otherwise."""
    return 1 if summarize(report)["fail"] else 0


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _fmt_residual(value) -> str:
    if value is None:
        return "-"
    return f"{value:.3e}"


def _render_entries(lines: list[str], entries: list[dict]) -> None:
    for e in entries:
        lines.append(
            f"  {e['name']:<58} {_fmt_residual(e.get('residual')):>10}  {e['verdict']}"
        )


def render_text(report: dict) -> str:
    lines: list[str] = []
    scene = report.get("scene", {})
    lines.append(f"parageo report v{report.get('report_version')} - scene '{scene.get('name')}'")
    samp = report.get("sampling")
    if samp:
        lines.append(
            f"sample plan: {samp['points_used']} points used, {len(samp['skipped'])} skipped"
        )

    amb = report.get("ambient")
    if amb:
        lines.append("")
        lines.append("AMBIENT STRUCTURE")
        _render_entries(lines, amb["checks"])
        lines.append(f"  signature: {tuple(amb['signature'])}  verdict: {amb['verdict']}")

    ref = report.get("reference_frame")
    if ref:
        lines.append("")
        lines.append(f"INDUCED METRIC at reference point {ref['point']}")
        for row in ref["induced_metric"]:
            lines.append("  [" + "  ".join(f"{v: .12g}" for v in row) + "]")

    if report.get("identities"):
        lines.append("")
        lines.append("FRAME IDENTITIES")
        _render_entries(lines, report["identities"])

    for name, slant in (report.get("distributions") or {}).items():
        lines.append("")
        lines.append(f"DISTRIBUTION {name}")
        lines.append(f"  classification: {slant['classification']}")
        lines.append(f"  slant coefficient: {slant['lam_hat']!r} (spread {slant['spread']:.3e})")
        lines.append(
            f"  deviation {slant['deviation']:.3e}  antisymmetry {slant['antisym_residual']:.3e}"
            f"  |tX| {slant['t_norm_max']:.3e}  |nX| {slant['n_norm_max']:.3e}"
        )
        if slant.get("angle") is not None:
            lines.append(f"  associated angle: {slant['angle']!r} rad")

    dec = report.get("decomposition")
    if dec:
        lines.append("")
        lines.append("DECOMPOSITION")
        lines.append(
            f"  verdict: {dec['classification']} (proper: {dec['proper']})  -> {dec['verdict']}"
        )
        lines.append(
            f"  orthogonality {dec['orth_residual']:.3e}  anti-invariance "
            f"{dec['antiinv_residual']:.3e}  span rank ok: {dec['span_rank_ok']}"
        )

    if report.get("slant_identities"):
        lines.append("")
        lines.append("SLANT-FACTOR IDENTITIES")
        _render_entries(lines, report["slant_identities"])

    if report.get("conditions"):
        lines.append("")
        lines.append("INTEGRABILITY / FOLIATION CRITERIA vs ORACLES")
        for c in report["conditions"]:
            agree = {True: "agree", False: "DISAGREE", None: "n/a"}[c["agreement"]]
            lines.append(
                f"  {c['name']:<48} criterion {_fmt_residual(c['condition_residual']):>10}"
                f" [{c['condition_verdict']}]  oracle {_fmt_residual(c['oracle_residual']):>10}"
                f" [{c['oracle_verdict']}]  {agree}  -> {c['verdict']}"
            )

    for wname, block in (report.get("warped") or {}).items():
        lines.append("")
        lines.append(
            f"WARPED DECLARATION '{wname}' base={block['base']} fiber={block['fiber']}"
            f" orientation={block.get('orientation')}"
        )
        det = block.get("detect")
        if det and "error" in det:
            lines.append(f"  detection: {det['error']}  -> {det['verdict']}")
        elif det:
            lines.append(
                f"  detection residuals: cross {det['residual_cross']:.3e}, "
                f"base-dep {det['residual_base_dependence']:.3e}, "
                f"conformal {det['residual_conformal']:.3e}, "
                f"factor {det['residual_factor']:.3e}  -> {det['verdict']}"
            )
            lines.append(
                f"  recovered warp (normalized at the reference point): "
                f"[{det['f_min']!r}, {det['f_max']!r}]"
            )
            if det.get("candidate_ratio_mean") is not None:
                lines.append(
                    f"  f / candidate: mean {det['candidate_ratio_mean']!r}, "
                    f"relative spread {det['candidate_ratio_spread']:.3e}"
                )
            lines.append(f"  trivial (constant warp): {det['trivial']}")
        if block.get("checks"):
            _render_entries(lines, block["checks"])
        obs = block.get("obstruction")
        if obs:
            lines.append(
                f"  obstruction: lambda {obs['lam_hat']!r}, max |d ln f| {obs['max_dlnf']:.3e}, "
                f"max |2 lam X(ln f) g(Z,Z)| {obs['max_lhs']:.3e}"
            )
            lines.append(f"  obstruction verdict: {obs['classification']} -> {obs['verdict']}")
            if obs["classification"] == "WarpingForcedConstant":
                lines.append(
                    "  warping forced constant: a nonconstant warp on an anti-invariant "
                    "base with a proper slant fiber is inconsistent"
                )

    if report.get("annotations"):
        lines.append("")
        lines.append("DISCREPANCY ANNOTATIONS (stated vs computed)")
        for a in report["annotations"]:
            mark = "agrees" if a["agrees"] else "DISCREPANCY"
            lines.append(
                f"  [{mark}] {a['quantity']}: stated {a['stated']!r}, computed "
                f"{a['computed']!r} - {a['note']}"
            )

    summary = report.get("summary")
    if summary:
        lines.append("")
        lines.append(
            f"SUMMARY pass={summary['pass']} fail={summary['fail']} "
            f"inconclusive={summary['inconclusive']} vacuous={summary['vacuous']}"
        )
    return "\n".join(lines) + "\n"
