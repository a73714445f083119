"""Train dispatching on a single-track line as a QUBO, with exact and heuristic solvers."""

__version__ = "0.1.0"

from .annealing import simulated_annealing
from .constraints import ConstraintSet, VariableIndex, build_constraints
from .diagram import DiagramData, schedule_diagram, timetable_diagram
from .heuristics import amcc, fcfs, flfs, heuristic_report
from .io import dump_instance, load_instance, qubo_to_text, read_qubo_text
from .model import Block, BlockKind, InstanceError, RailwayInstance, TimetableEntry, Train, Turnover
from .ordering import exact_order_solver
from .qubo import (
    IsingInstance,
    QuboInstance,
    Schedule,
    assemble,
    build_objective,
    build_qubo,
    equivalence_signature,
    is_ground_equivalent,
    to_ising,
)
from .report import Infeasible, SolverReport
from .spectrum import Spectrum, enumerate_spectrum
from .validation import cross_validate
from .verify import check_capacity, check_conditions

__all__ = [
    "Block",
    "BlockKind",
    "ConstraintSet",
    "DiagramData",
    "Infeasible",
    "InstanceError",
    "IsingInstance",
    "QuboInstance",
    "RailwayInstance",
    "Schedule",
    "SolverReport",
    "Spectrum",
    "TimetableEntry",
    "Train",
    "Turnover",
    "VariableIndex",
    "amcc",
    "assemble",
    "build_constraints",
    "build_objective",
    "build_qubo",
    "check_capacity",
    "check_conditions",
    "cross_validate",
    "dump_instance",
    "enumerate_spectrum",
    "equivalence_signature",
    "exact_order_solver",
    "fcfs",
    "flfs",
    "heuristic_report",
    "is_ground_equivalent",
    "load_instance",
    "qubo_to_text",
    "read_qubo_text",
    "schedule_diagram",
    "simulated_annealing",
    "timetable_diagram",
    "to_ising",
]
