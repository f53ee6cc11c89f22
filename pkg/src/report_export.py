"""
PDF export of run reports
"""
import json
import logging
from io import BytesIO
from typing import Dict, List

try:
    from reportlab.lib import colors
    from reportlab.lib.enums import TA_LEFT
    from reportlab.lib.pagesizes import A4
    from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
    from reportlab.lib.units import inch
    from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle
    REPORTLAB_AVAILABLE = True
except ImportError:
    REPORTLAB_AVAILABLE = False

from .errors import PreconditionError

logger = logging.getLogger(__name__)


def _suite_rows(report: Dict) -> List[List[str]]:
    rows = [["Suite", "Status", "Residual", "Tolerance"]]
    for suite in report.get("suites", []):
        residual = suite.get("residual")
        rows.append([
            str(suite.get("name", "")),
            "PASS" if suite.get("passed") else "FAIL",
            f"{residual:.3e}" if isinstance(residual, (int, float)) else str(residual),
            f"{suite['tolerance']:.1e}" if isinstance(suite.get("tolerance"), (int, float)) else "-",
        ])
    return rows


def _table(data: List[List[str]], header_color: str, widths) -> "Table":
    table = Table(data, colWidths=widths)
    table.setStyle(TableStyle([
        ('BACKGROUND', (0, 0), (-1, 0), colors.HexColor(header_color)),
        ('TEXTCOLOR', (0, 0), (-1, 0), colors.whitesmoke),
        ('ALIGN', (0, 0), (-1, -1), 'LEFT'),
        ('FONTNAME', (0, 0), (-1, 0), 'Helvetica-Bold'),
        ('FONTSIZE', (0, 0), (-1, 0), 10),
        ('BOTTOMPADDING', (0, 0), (-1, 0), 10),
        ('BACKGROUND', (0, 1), (-1, -1), colors.beige),
        ('GRID', (0, 0), (-1, -1), 1, colors.black),
        ('FONTSIZE', (0, 1), (-1, -1), 8),
    ]))
    return table


def export_pdf(report: Dict) -> bytes:
    """Render a report as PDF bytes"""
    if not REPORTLAB_AVAILABLE:
        raise PreconditionError("PDF export requires ReportLab library. Please install it: pip install reportlab")

    buffer = BytesIO()
    doc = SimpleDocTemplate(buffer, pagesize=A4, rightMargin=72, leftMargin=72, topMargin=72, bottomMargin=72)
    story = []

    styles = getSampleStyleSheet()
    title_style = ParagraphStyle(
        'ReportTitle',
        parent=styles['Heading1'],
        fontSize=18,
        textColor=colors.HexColor('#0066cc'),
        spaceAfter=12,
        alignment=TA_LEFT
    )
    heading_style = ParagraphStyle(
        'ReportHeading',
        parent=styles['Heading2'],
        fontSize=14,
        textColor=colors.HexColor('#0066cc'),
        spaceAfter=10,
        spaceBefore=12
    )
    normal_style = styles['Normal']
    code_style = ParagraphStyle('ReportCode', parent=styles['Code'], fontSize=7, leading=8)

    story.append(Paragraph(f"TorsionLab report: {report.get('command', '?')}", title_style))
    story.append(Spacer(1, 0.2 * inch))
    config = report.get("config", {})
    header_text = f"<b>Config:</b> {config.get('name', '-')} | <b>Version:</b> {report.get('version', '-')}"
    header_text += f" | <b>Result:</b> {'PASS' if report.get('passed') else 'FAIL'}"
    story.append(Paragraph(header_text, normal_style))
    story.append(Spacer(1, 0.3 * inch))

    if report.get("suites"):
        story.append(Paragraph(f"Suites ({len(report['suites'])})", heading_style))
        story.append(_table(_suite_rows(report), '#0066cc', [2.6 * inch, 0.8 * inch, 1.2 * inch, 1.0 * inch]))
        story.append(Spacer(1, 0.2 * inch))

    if report.get("warnings"):
        story.append(Paragraph("Warnings", heading_style))
        for warning in report["warnings"]:
            story.append(Paragraph(str(warning), normal_style))

    story.append(Paragraph("Results", heading_style))
    for line in json.dumps(report.get("results", {}), indent=1, sort_keys=True).splitlines():
        story.append(Paragraph(line.replace(" ", "&nbsp;"), code_style))

    doc.build(story)
    pdf_data = buffer.getvalue()
    buffer.close()
    logger.debug("Rendered PDF report of %d bytes", len(pdf_data))
    return pdf_data
