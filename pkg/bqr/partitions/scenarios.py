"""
Scenario Partition Definition
시나리오 스터디 asset이 사용하는 정적 파티션 ("1" ~ "4")
"""

from dagster import StaticPartitionsDefinition

from bqr.config.fit_config import SCENARIO_FLAGS

scenario_partitions_def = StaticPartitionsDefinition(
    [str(scenario) for scenario in sorted(SCENARIO_FLAGS)]
)


def parse_scenario_key(partition_key: str) -> int:
    """
    파티션 키를 시나리오 번호로 변환

    Args:
        partition_key: Dagster 파티션 키 ("1" ~ "4")

    Returns:
        시나리오 번호
    """
    scenario = int(partition_key)
    if scenario not in SCENARIO_FLAGS:
        raise ValueError(f"Unknown scenario partition '{partition_key}'")
    return scenario
