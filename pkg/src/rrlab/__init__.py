"""rrlab: a laboratory for ITC2021-style round-robin sports timetabling.

Evaluate and solve instances, extract problem-type and instance features,
project them into 2D analysis spaces, and run algorithm-selection and
portfolio-contribution analyses over per-algorithm performance records.
"""

__version__ = "0.1.0"
