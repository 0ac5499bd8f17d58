from dataclasses import dataclass
from typing import Tuple
from xml.sax.saxutils import escape, quoteattr


@dataclass(frozen=True)
class Panel:
    title: str
    body: str = ""
    related_owners: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "related_owners", tuple(self.related_owners))


@dataclass(frozen=True)
class DisplayCommand:
    """An instruction for a display target (workstation, mobile or wall) to show panels."""
    target: str
    panels: Tuple[Panel, ...]

    def __post_init__(self):
        object.__setattr__(self, "panels", tuple(self.panels))
        if not self.panels:
            raise ValueError("a display command needs at least one panel")


def panel_xml(panel):
    owners = sorted(panel.related_owners)
    if owners:
        owner_xml = "<owners>" + "".join(f"<owner name={quoteattr(o)}/>" for o in owners) + "</owners>"
    else:
        owner_xml = "<owners/>"
    return f"<panel title={quoteattr(panel.title)}><body>{escape(panel.body)}</body>{owner_xml}</panel>"


def emit_xml(command):
    """
    Serialize a display command as one XML document.

    Panels keep their order, owners are sorted, and no XML declaration is
    written so documents can be concatenated into a stream.
    """
    panels = "".join(panel_xml(p) for p in command.panels)
    return f"<display target={quoteattr(command.target)}>{panels}</display>"
