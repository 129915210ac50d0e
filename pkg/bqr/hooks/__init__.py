from bqr.hooks.study_hooks import study_failure_hook, study_success_hook

__all__ = ["study_failure_hook", "study_success_hook"]
