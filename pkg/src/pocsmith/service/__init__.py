from .app import create_app
from .events import EventBus, sse_format
from .jobs import JobManager, JobStatus

__all__ = ["create_app", "EventBus", "sse_format", "JobManager", "JobStatus"]
