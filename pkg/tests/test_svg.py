import xml.etree.ElementTree as ET

import pytest

from cat0_classify import axes_space, build_good_cover, preset
from cat0_classify.classifying import build_axes_cover
from cat0_classify.spaces import DomainError
from cat0_classify.svg import emit_svg

NS = "{http://www.w3.org/2000/svg}"


def test_svg_structure_and_determinism():
    G = preset("p1")
    cover = build_good_cover(G.space, G, 1)
    ac = build_axes_cover(G, axes_space(G, "enumerated", 2), 1)
    svg = emit_svg(G.space, cover, ac, 1)
    root = ET.fromstring(svg)
    classes = root.findall(f"{NS}g[@class='axes-class']")
    assert len(classes) == 4
    circles = root.find(f"{NS}g[@class='cover']").findall(f"{NS}circle")
    assert len(circles) == len(cover)
    assert root.find(f"{NS}circle[@class='window']") is not None
    assert emit_svg(G.space, cover, ac, 1) == svg


def test_svg_needs_the_plane():
    G = preset("tree-odometer", depth=4)
    with pytest.raises(DomainError):
        emit_svg(G.space)
