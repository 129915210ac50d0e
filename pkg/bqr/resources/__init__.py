from bqr.resources.study import StudyOutputResource, StudySettingsResource

__all__ = ["StudyOutputResource", "StudySettingsResource"]
