"""
Study Hooks - Step-level success/failure 로깅 hooks

사용법:
    define_asset_job(..., hooks={study_success_hook, study_failure_hook})
"""

from datetime import datetime, timezone

from dagster import HookContext, failure_hook, success_hook
from dagster._core.events import DagsterEventType


def _run_tags(context: HookContext) -> tuple[str, str]:
    """(study, partition_key) 태그 조회"""
    dagster_run = context.instance.get_run_by_id(context.run_id)
    if dagster_run is None:
        return "unknown", ""
    return (
        dagster_run.tags.get("study", "unknown"),
        dagster_run.tags.get("dagster/partition", ""),
    )


@success_hook
def study_success_hook(context: HookContext) -> None:
    """Step 성공 시 duration과 함께 구조화된 로그 기록"""
    step_key = context.step_key
    duration_sec = _get_step_duration(context.instance, context.run_id, step_key)
    study, partition_key = _run_tags(context)

    context.log.info(
        "Step succeeded: %s (%.3fs)",
        step_key,
        duration_sec or 0,
        extra={
            "study": study,
            "job_name": context.job_name,
            "step_key": step_key,
            "duration_sec": duration_sec,
            "partition_key": partition_key,
            "status": "success",
        },
    )


@failure_hook
def study_failure_hook(context: HookContext) -> None:
    """Step 실패 시 에러 정보와 함께 구조화된 로그 기록 (StudyAbortedError 포함)"""
    step_key = context.step_key
    duration_sec = _get_step_duration(context.instance, context.run_id, step_key)
    study, partition_key = _run_tags(context)
    error_message = _get_step_error(context.instance, context.run_id, step_key)

    context.log.error(
        "Step failed: %s (%s)",
        step_key,
        error_message[:200] if error_message else "unknown error",
        extra={
            "study": study,
            "job_name": context.job_name,
            "step_key": step_key,
            "duration_sec": duration_sec,
            "partition_key": partition_key,
            "status": "failure",
            "error_message": error_message,
        },
    )


def _get_step_duration(instance: object, run_id: str, step_key: str) -> float | None:
    """STEP_START 이벤트로부터 step 실행 시간 계산"""
    for record in instance.all_logs(run_id, of_type={DagsterEventType.STEP_START}):
        entry = record.event_log_entry
        if entry.step_key == step_key:
            now = datetime.now(tz=timezone.utc).timestamp()
            return round(now - entry.timestamp, 3)
    return None


def _get_step_error(instance: object, run_id: str, step_key: str) -> str:
    """STEP_FAILURE 이벤트에서 에러 메시지 추출"""
    for record in instance.all_logs(run_id, of_type={DagsterEventType.STEP_FAILURE}):
        entry = record.event_log_entry
        if entry.step_key == step_key and entry.error_info:
            return entry.error_info.message[:500]
    return ""
