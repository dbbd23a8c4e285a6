"""Uniform result reports: human text plus a machine JSON sidecar."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

_EXIT = {"valid": 0, "accepted": 0, "proved": 0, "ok": 0,
         "invalid": 1, "rejected": 1, "refuted": 1, "violation": 1,
         "error": 2}

_VOLATILE = ("wall_ms",)


@dataclass
class Report:
    status: str
    details: list = field(default_factory=list)  # {location, message, witness?}
    stats: dict = field(default_factory=dict)

    def add(self, location, message, witness=None):
        d = {"location": location, "message": message}
        if witness is not None:
            d["witness"] = witness
        self.details.append(d)

    @property
    def exit_code(self):
        return _EXIT.get(self.status, 2)

    def to_json(self, volatile=True):
        stats = dict(self.stats)
        if not volatile:
            for k in _VOLATILE:
                stats.pop(k, None)
        return {"status": self.status, "details": self.details, "stats": stats}

    def render(self):
        lines = [f"status: {self.status}"]
        for d in self.details:
            w = f"  [witness {d['witness']}]" if "witness" in d else ""
            lines.append(f"  {d['location']}: {d['message']}{w}")
        for k in sorted(self.stats):
            lines.append(f"  {k}: {self.stats[k]}")
        return "\n".join(lines)


def dump_json(report, path, volatile=True):
    with open(path, "w") as fh:
        json.dump(report.to_json(volatile), fh, indent=2, sort_keys=True)
        fh.write("\n")
