import json
import os


def table2_cells():
    # N=2^24, k=460, |G|=48 B, T_G=0.665471 ms
    return load_cells_from_file("table2.json")


def table3_cells():
    # N=2^24, k=460, |H|=0.21 MB, T_H=2.74 ms
    return load_cells_from_file("table3.json")


def table4_cells():
    # N=2^24, k=460, 24 B index plus |G| per published commitment
    return load_cells_from_file("table4.json")


def load_cells_from_file(file_name):
    dir = os.path.dirname(__file__)
    file_path = os.path.join(dir, file_name)
    with open(file_path, "r") as file:
        return json.load(file)
