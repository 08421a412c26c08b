"""Frozen expected pulse programs for the 35 balanced oracles U(1,k,l,m).

Each entry lists the merged 2pi layers as transition letters.
"""

ORACLE_PROGRAMS = {
    (2, 3, 4): ["ac"],
    (2, 3, 5): ["ac", "d"],
    (2, 3, 6): ["ace", "d"],
    (2, 3, 7): ["ace", "df"],
    (2, 3, 8): ["aceg", "df"],
    (2, 4, 5): ["ad"],
    (2, 4, 6): ["ad", "e"],
    (2, 4, 7): ["adf", "e"],
    (2, 4, 8): ["adf", "eg"],
    (2, 5, 6): ["ae"],
    (2, 5, 7): ["ae", "f"],
    (2, 5, 8): ["aeg", "f"],
    (2, 6, 7): ["af"],
    (2, 6, 8): ["af", "g"],
    (2, 7, 8): ["ag"],
    (3, 4, 5): ["ad", "b"],
    (3, 4, 6): ["ad", "be"],
    (3, 4, 7): ["adf", "be"],
    (3, 4, 8): ["adf", "beg"],
    (3, 5, 6): ["ae", "b"],
    (3, 5, 7): ["ae", "bf"],
    (3, 5, 8): ["aeg", "bf"],
    (3, 6, 7): ["af", "b"],
    (3, 6, 8): ["af", "bg"],
    (3, 7, 8): ["ag", "b"],
    (4, 5, 6): ["ace", "b"],
    (4, 5, 7): ["ace", "bf"],
    (4, 5, 8): ["aceg", "bf"],
    (4, 6, 7): ["acf", "b"],
    (4, 6, 8): ["acf", "bg"],
    (4, 7, 8): ["acg", "b"],
    (5, 6, 7): ["acf", "bd"],
    (5, 6, 8): ["acf", "bdg"],
    (5, 7, 8): ["acg", "bd"],
    (6, 7, 8): ["aceg", "bd"],
}
