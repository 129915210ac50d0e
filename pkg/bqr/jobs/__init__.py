from bqr.jobs.study_jobs import calibration_job, simulation_study_job

__all__ = ["calibration_job", "simulation_study_job"]
