from bqr.assets.studies import calibration_study, scenario_study

__all__ = ["calibration_study", "scenario_study"]
