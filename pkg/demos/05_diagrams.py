"""Time-distance diagrams before and after dispatching.

Writes three SVG files to ./line216_diagrams: the timetable, the timetable
with the initial delays pushed through (conflicts marked), and the optimal
schedule.
"""

# %%
from pathlib import Path

import railqubo as rq

inst = rq.io.load_instance("line216")
out = Path("line216_diagrams")
out.mkdir(exist_ok=True)

# %%
plan = rq.diagram.timetable_diagram(inst)
disturbed = rq.diagram.timetable_diagram(inst, disturbed=True)
solved = rq.diagram.schedule_diagram(rq.ordering.exact_order_solver(inst).schedule)

for tag, data in (("timetable", plan), ("disturbed", disturbed), ("solved", solved)):
    (out / f"{tag}.svg").write_text(data.to_svg())
    print(f"{tag}: {len(data.conflicts)} conflicts")
    for c in data.conflicts:
        print(f"  block {c.block} {rq.model.fmt_time(c.start)}-{rq.model.fmt_time(c.end)} {', '.join(c.trains)}")
