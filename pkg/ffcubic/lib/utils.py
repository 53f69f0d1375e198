import os
import json
import logging

logging.getLogger("sympy").setLevel(logging.WARNING)


class ConsistencyError(RuntimeError):
    """Two independent evaluation routes for the same quantity disagree."""


class BudgetExceeded(RuntimeError):
    def __init__(self, message, completed=None, remaining=None):
        super().__init__(message)
        self.completed = completed or []
        self.remaining = remaining or []


class DegreeCapExceeded(RuntimeError):
    def __init__(self, degree, cap):
        super().__init__(f"Degree {degree} is above the C-sum cap {cap}.")
        self.degree = degree
        self.cap = cap


def format_duration(seconds):
    hours = int(seconds // 3600)
    minutes = int((seconds % 3600) // 60)
    seconds = int(seconds % 60)
    return f"{hours:02}:{minutes:02}:{seconds:02}"


def dump_json(file_path, data):
    directory = os.path.dirname(file_path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(file_path, "w") as f:
        json.dump(data, f, indent=4, sort_keys=True)
        f.write("\n")


def load_json(file_path):
    try:
        with open(file_path, "r") as f:
            return json.load(f)
    except FileNotFoundError:
        return {}


def append_csv_row(file_path, header, row):
    directory = os.path.dirname(file_path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    write_header = not os.path.exists(file_path)
    with open(file_path, "a") as f:
        if write_header:
            f.write(",".join(header) + "\n")
        f.write(",".join(str(value) for value in row) + "\n")
