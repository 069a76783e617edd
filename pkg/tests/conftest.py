import os
import sys

from hypothesis import HealthCheck, settings

# module-scoped budgets keep the property suite under a few seconds while
# still exercising fresh inputs every run
settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

sys.path.insert(0, os.path.dirname(__file__))
