import json

from models.checker import CollisionAbsence, Coverage, NearbyDevices, Verdict
from models.geometry import Box, Circle, Pt, Union


def region_to_dict(region):
    if isinstance(region, Pt):
        return {"type": "Pt", "x": region.x, "y": region.y}
    if isinstance(region, Box):
        return {"type": "Box", "x1": region.x1, "y1": region.y1, "x2": region.x2, "y2": region.y2}
    if isinstance(region, Circle):
        return {"type": "Circle", "cx": region.cx, "cy": region.cy, "r": region.r}
    if isinstance(region, Union):
        return {"type": "Union", "members": [region_to_dict(m) for m in region.members]}
    raise TypeError(f"not a region: {region!r}")


def query_to_dict(query):
    """Describe a query as plain data, tagged with its type name."""
    if isinstance(query, CollisionAbsence):
        return {"type": "CollisionAbsence", "owner_a": query.owner_a, "owner_b": query.owner_b,
                "horizon": query.horizon, "resolution": query.resolution}
    if isinstance(query, Coverage):
        return {"type": "Coverage", "sensor_owners": list(query.sensor_owners),
                "target": region_to_dict(query.target),
                "horizon": query.horizon, "resolution": query.resolution}
    if isinstance(query, NearbyDevices):
        return {"type": "NearbyDevices", "owner": query.owner, "t": query.t, "radius": query.radius}
    raise TypeError(f"not a query: {query!r}")


def verdict_to_dict(verdict: Verdict):
    """
    Convert a verdict into the structured report document.

    Returns:
        dict: {query, holds, witness, stats}, plus ``related`` for nearby-device answers
    """
    witness = None
    if verdict.witness is not None:
        w = verdict.witness
        witness = {"t": w.t, "x": w.x, "y": w.y, "detail": w.detail}
    report = {
        "query": query_to_dict(verdict.query),
        "holds": verdict.holds,
        "witness": witness,
        "stats": {
            "ground_atoms": verdict.stats.ground_atoms,
            "ticks_checked": verdict.stats.ticks_checked,
        },
    }
    if isinstance(verdict.query, NearbyDevices):
        report["related"] = list(verdict.related)
    return report


def verdict_to_json(verdict: Verdict):
    return json.dumps(verdict_to_dict(verdict), indent=2, sort_keys=True)


def _query_line(query):
    fields = query_to_dict(query)
    kind = fields.pop("type")
    return f"{kind}(" + ", ".join(f"{k}={v}" for k, v in fields.items()) + ")"


def verdict_to_text(verdict: Verdict):
    """``key: value`` lines, one per report field."""
    lines = [
        f"query: {_query_line(verdict.query)}",
        f"holds: {'true' if verdict.holds else 'false'}",
    ]
    if verdict.witness is not None:
        w = verdict.witness
        lines.append(f"witness: t={w.t} x={w.x} y={w.y}")
        if w.detail:
            lines.append(f"detail: {w.detail}")
    else:
        lines.append("witness: none")
    lines.append(f"ground_atoms: {verdict.stats.ground_atoms}")
    lines.append(f"ticks_checked: {verdict.stats.ticks_checked}")
    if isinstance(verdict.query, NearbyDevices):
        lines.append(f"related: {', '.join(verdict.related) if verdict.related else 'none'}")
    return "\n".join(lines)


def format_verdict(verdict: Verdict, output_format="text"):
    if output_format == "json":
        return verdict_to_json(verdict)
    return verdict_to_text(verdict)


def dead_letter_report(dead_letters):
    """Structured list of rejected events: the raw record (or line) and the rejection reason."""
    return [{"event": raw, "reason": reason} for raw, reason in dead_letters]
