# TorsionLab - refined torsion of Z2-graded complexes
__version__ = "0.4.0"
