"""
Report store for JSON run reports
"""
import json
from pathlib import Path
from typing import Dict, List, Optional

REPORT_VERSION = "1.0.0"
FLOAT_DIGITS = 12
REQUIRED_FIELDS = ("version", "command", "config", "results", "suites", "passed")


def normalize(value):
    """Plain JSON data with floats fixed to FLOAT_DIGITS significant digits"""
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            return str(value)
        return float(f"{value:.{FLOAT_DIGITS}g}")
    if isinstance(value, complex):
        return [normalize(value.real), normalize(value.imag)]
    if isinstance(value, dict):
        return {str(k): normalize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [normalize(v) for v in value]
    if hasattr(value, "to_dict"):
        return normalize(value.to_dict())
    if hasattr(value, "item"):
        return normalize(value.item())
    raise TypeError(f"Cannot serialize {type(value).__name__} into a report")


def dumps(report: Dict) -> str:
    return json.dumps(normalize(report), indent=2, sort_keys=True) + "\n"


class ReportStore:
    """Manages run reports on disk"""

    def __init__(self, reports_dir: str = "reports"):
        self.reports_dir = Path(reports_dir)
        self.reports_dir.mkdir(parents=True, exist_ok=True)

    def list_reports(self) -> List[str]:
        """List all stored reports"""
        return sorted(f.stem for f in self.reports_dir.glob("*.json"))

    def get_report(self, report_name: str) -> Optional[Dict]:
        """Get a report by name"""
        report_path = self.reports_dir / f"{report_name}.json"

        if not report_path.exists():
            return None

        try:
            with open(report_path, "r") as f:
                return json.load(f)
        except (json.JSONDecodeError, IOError) as e:
            raise ValueError(f"Failed to load report {report_name}: {str(e)}")

    def save_report(self, report_name: str, report: Dict) -> Path:
        """Save a report to disk"""
        report_path = self.reports_dir / f"{report_name}.json"

        try:
            with open(report_path, "w") as f:
                f.write(dumps(report))
            return report_path
        except (IOError, TypeError) as e:
            raise ValueError(f"Failed to save report {report_name}: {str(e)}")

    def delete_report(self, report_name: str) -> bool:
        """Delete a report from disk"""
        report_path = self.reports_dir / f"{report_name}.json"

        if not report_path.exists():
            return False

        report_path.unlink()
        return True

    def validate_report(self, report: Dict) -> Dict:
        """Validate a report structure"""
        errors = []
        warnings = []

        for field in REQUIRED_FIELDS:
            if field not in report:
                errors.append(f"Missing required field: {field}")

        if "version" in report and report["version"] != REPORT_VERSION:
            warnings.append(f"Report version {report['version']} differs from {REPORT_VERSION}")

        if "suites" in report:
            if not isinstance(report["suites"], list):
                errors.append("Suites must be an array")
            else:
                for i, suite in enumerate(report["suites"]):
                    if not isinstance(suite, dict):
                        errors.append(f"Suite {i} must be an object")
                        continue
                    for field in ("name", "passed", "residual"):
                        if field not in suite:
                            errors.append(f"Suite {i} missing required field: {field}")

        if "passed" in report and "suites" in report and isinstance(report["suites"], list):
            all_passed = all(s.get("passed") for s in report["suites"] if isinstance(s, dict))
            if bool(report["passed"]) != all_passed:
                errors.append("Top-level passed flag disagrees with the suite table")

        for warning in report.get("warnings", []) if isinstance(report.get("warnings"), list) else []:
            warnings.append(str(warning))

        return {
            "valid": len(errors) == 0,
            "errors": errors,
            "warnings": warnings
        }
