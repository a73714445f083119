import xml.etree.ElementTree as ET

from railqubo.diagram import find_conflicts, schedule_diagram, timetable_diagram
from railqubo.model import RailwayInstance
from railqubo.ordering import exact_order_solver

SVG = "{http://www.w3.org/2000/svg}"


def parse(svg):
    return ET.fromstring(svg)


def test_timetable_has_no_conflicts(line216):
    data = timetable_diagram(line216)
    assert data.conflicts == []
    root = parse(data.to_svg())
    assert len(root.findall(f"{SVG}polyline")) == 3
    assert not [r for r in root.findall(f"{SVG}rect") if r.get("class") == "conflict"]


def test_disturbed_conflicts_on_block_4(line216):
    data = timetable_diagram(line216, disturbed=True)
    blocks = {c.block for c in data.conflicts}
    assert 4 in blocks
    ic = [c for c in data.conflicts if c.trains == ("IC3521", "IC5320")]
    assert ic and ic[0].block == 4
    root = parse(data.to_svg())
    assert len([r for r in root.findall(f"{SVG}rect") if r.get("class") == "conflict"]) == len(data.conflicts)


def test_solution_clears_conflicts(line216):
    data = schedule_diagram(exact_order_solver(line216).schedule)
    assert data.conflicts == []


def test_single_train(line216):
    inst = RailwayInstance(
        list(line216.blocks.values()),
        [line216.trains["R90602"]],
        {k: v for k, v in line216.timetable.items() if k[0] == "R90602"},
        7,
    )
    root = parse(timetable_diagram(inst).to_svg())
    assert len(root.findall(f"{SVG}polyline")) == 1


def test_rows_follow_routes(line191):
    data = timetable_diagram(line191, disturbed=True)
    for j, t in line191.trains.items():
        rows = [r for r in data.rows if r.train == j]
        assert [r.block for r in rows] == list(t.route)
        # leaving one block is entering the next
        for a, b in zip(rows, rows[1:]):
            assert a.t_out == b.t_in


def test_csv_layout(line216):
    text = timetable_diagram(line216).to_csv().splitlines()
    assert text[0] == "# format railqubo-diagram version 1"
    assert text[1] == "train,block,t_in,t_out,is_station"
    assert len(text) == 2 + sum(len(t.route) for t in line216.trains.values())


def test_station_capacity_marker(line216):
    from railqubo.diagram import Row

    rows = [Row("a", 3, 0, 5, True), Row("b", 3, 2, 6, True), Row("c", 3, 4, 9, True)]
    (c,) = find_conflicts(line216, rows)
    assert (c.block, c.start, c.end, c.trains) == (3, 4, 5, ("a", "b", "c"))


def test_touching_line_occupations_are_fine(line216):
    from railqubo.diagram import Row

    assert find_conflicts(line216, [Row("a", 4, 0, 5, False), Row("b", 4, 5, 9, False)]) == []
