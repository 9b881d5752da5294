from .core import (  # noqa: F401
    Alarm,
    AlarmKind,
    AlarmState,
    Mission,
    MissionRun,
    RunState,
    Severity,
    ThresholdConfig,
)
from .service import RmsError, RmsService  # noqa: F401
