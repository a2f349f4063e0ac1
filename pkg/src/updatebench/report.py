"""Plain-text tables for evaluation reports."""

from __future__ import annotations

from .metrics import EvalReport, method_size_buckets, update_size_buckets


def _fmt_rate(value) -> str:
    return "n/a" if value is None else f"{100.0 * value:5.1f}%"


def _fmt_score(value) -> str:
    return "n/a" if value is None else f"{value:.3f}"


def _table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    def line(cells):
        return "  ".join(c.rjust(w) for c, w in zip(cells, widths))
    sep = "-" * (sum(widths) + 2 * (len(widths) - 1))
    return "\n".join([line(headers), sep] + [line(r) for r in rows])


def render_main_table(report: EvalReport) -> str:
    rows = [
        [f"{k}", _fmt_rate(v["pp_rate"]), _fmt_score(v["bleu"]), _fmt_score(v["codebleu"])]
        for k, v in sorted(report.per_k.items())
    ]
    return "Accuracy by beam size\n" + _table(["Beam", "PP%", "BLEU", "CodeBLEU"], rows)


def render_type_table(report: EvalReport) -> str:
    counts = report.counts.get("per_type", {})
    rows = [
        [name, _fmt_rate(rate), str(counts.get(name, 0))]
        for name, rate in report.per_type.items()
    ]
    note = "(types assigned by the keyword heuristic, an approximation of manual coding)"
    return "Per update type (at max beam)\n" + _table(["Update type", "PP%", "N"], rows) + "\n" + note


def render_bucket_matrix(report: EvalReport) -> str:
    ubs = update_size_buckets()
    headers = ["Method size \\ #Updated tokens"] + ubs
    rows = []
    for mb in method_size_buckets():
        row = [mb] + [_fmt_rate(report.per_bucket.get(mb, {}).get(ub)) for ub in ubs]
        rows.append(row)
    return "PP% by method size and update size (at max beam)\n" + _table(headers, rows)


def render_time_comparison(timewise: EvalReport | None, timeignore: EvalReport | None) -> str:
    title = "Time-wise vs time-ignore"
    if timewise is None or timeignore is None:
        missing = []
        if timewise is None:
            missing.append("time-wise")
        if timeignore is None:
            missing.append("time-ignore")
        return f"{title}\nn/a (missing run: {', '.join(missing)})"
    ks = sorted(set(timewise.per_k) & set(timeignore.per_k))
    rows = []
    for k in ks:
        tw, ti = timewise.per_k[k], timeignore.per_k[k]
        rows.append(
            [
                f"{k}",
                _fmt_rate(tw["pp_rate"]), _fmt_score(tw["bleu"]), _fmt_score(tw["codebleu"]),
                _fmt_rate(ti["pp_rate"]), _fmt_score(ti["bleu"]), _fmt_score(ti["codebleu"]),
            ]
        )
    headers = ["Beam", "TW PP%", "TW BLEU", "TW CodeBLEU", "TI PP%", "TI BLEU", "TI CodeBLEU"]
    return title + "\n" + _table(headers, rows)


def render_full_report(
    report: EvalReport,
    timeignore: EvalReport | None = None,
) -> str:
    sections = [
        render_main_table(report),
        render_type_table(report),
        render_bucket_matrix(report),
        render_time_comparison(report, timeignore),
    ]
    return "\n\n".join(sections) + "\n"
