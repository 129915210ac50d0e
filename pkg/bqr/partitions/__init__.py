from bqr.partitions.scenarios import parse_scenario_key, scenario_partitions_def

__all__ = ["parse_scenario_key", "scenario_partitions_def"]
