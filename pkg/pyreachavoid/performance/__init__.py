from .measure import Measure
