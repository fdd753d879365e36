import csv
import io

from reportlab.lib.pagesizes import letter
from reportlab.pdfgen import canvas

from regimes import TIE_ORDER

SWEEP_HEADER = ["eps", "winner_regime", "p_opt", "q_opt", "leader_value", "follower_value", "oracle_agrees"]


def format_number(value):
    """Shortest round-trip text for CSV cells; blanks for missing values."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(float(value))


def sweep_csv(rows, verbose=False):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(SWEEP_HEADER + (["reason"] if verbose else []))
    for row in rows:
        cells = [
            format_number(row.eps),
            str(row.winner_regime.code if row.winner_regime is not None else 0),
            format_number(row.p_opt),
            format_number(row.q_opt),
            format_number(row.leader_value),
            format_number(row.follower_value),
            format_number(row.oracle_agrees),
        ]
        if verbose:
            cells.append(row.reason or "")
        writer.writerow(cells)
    return buffer.getvalue()


def report_json(report):
    return report.model_dump_json(indent=2) + "\n"


def render_report(report, title=None):
    params = report.params
    lines = []
    if title:
        lines.append(title)
    lines.append(f"eps = {params.eps!r}")
    lines.append("")
    lines.append(f"{'regime':<16}{'status':<10}{'p':>16}{'q':>16}{'leader value':>18}")
    solved = {solution.regime: solution for solution in report.solutions}
    empty = {entry.regime: entry for entry in report.empty_regimes}
    for regime in TIE_ORDER:
        if regime in solved:
            s = solved[regime]
            lines.append(f"{regime.value:<16}{'ok':<10}{s.p_opt:>16.6g}{s.q_opt:>16.6g}{s.leader_value:>18.10g}")
        else:
            entry = empty[regime]
            status = "gated" if entry.value is not None else "empty"
            value = f"{entry.value:>18.10g}" if entry.value is not None else f"{'-':>18}"
            lines.append(f"{regime.value:<16}{status:<10}{'-':>16}{'-':>16}{value}")
            lines.append(f"    {entry.reason}")
    winner = report.winner
    lines.append("")
    lines.append(f"winner: {winner.regime.value} at p={winner.p_opt!r}, q={winner.q_opt!r}")
    lines.append(f"  leader value {winner.leader_value!r}, follower value {winner.follower_value!r}")
    lines.append(f"  follower answer: {winner.follower.branch.value}")
    flags = report.lemma_flags
    lines.append("")
    lines.append(f"objective not concave (both-profitable interior excluded): {flags.lemma1_holds}")
    lines.append(f"in-house loss region empty: {flags.loss_regime_empty}")
    lines.append(f"large-eps max-price condition: {flags.lemma2_condition_holds}")
    if report.oracle_check is not None:
        check = report.oracle_check
        lines.append(f"oracle: best {check.best_value!r} at {check.best_point}, gap {check.gap_vs_candidate!r}, "
                     f"agrees {check.agrees}")
    return "\n".join(lines) + "\n"


def export_report_pdf(filename, content):
    c = canvas.Canvas(filename, pagesize=letter)
    width, height = letter
    text = c.beginText(40, height - 40)
    text.setFont("Courier", 9)
    for line in content.split("\n"):
        if text.getY() < 40:
            c.drawText(text)
            c.showPage()
            text = c.beginText(40, height - 40)
            text.setFont("Courier", 9)
        text.textLine(line)
    c.drawText(text)
    c.save()
    return {"message": f"PDF saved as {filename}"}
