"""
BQR Exceptions
"""


class BQRError(Exception):
    """패키지 공통 예외"""


class DataIngestError(BQRError, ValueError):
    """데이터 적재/검증 실패 (CSV 파싱, 결측, rank 부족 등)"""

    def __init__(
        self,
        message: str,
        row: int | None = None,
        column: str | None = None,
    ):
        self.row = row
        self.column = column
        location = []
        if row is not None:
            location.append(f"row={row}")
        if column is not None:
            location.append(f"column={column}")
        suffix = f" ({', '.join(location)})" if location else ""
        super().__init__(f"{message}{suffix}")


class FactorizationError(BQRError):
    """β full conditional precision 행렬이 양정치가 아님"""

    def __init__(
        self,
        message: str,
        v_range: tuple[float, float] | None = None,
        sweep: int | None = None,
    ):
        self.v_range = v_range
        self.sweep = sweep
        details = []
        if v_range is not None:
            details.append(f"v_min={v_range[0]:.3e}, v_max={v_range[1]:.3e}")
        if sweep is not None:
            details.append(f"sweep={sweep}")
        suffix = f" [{'; '.join(details)}]" if details else ""
        super().__init__(f"{message}{suffix}")

    def at_sweep(self, sweep: int) -> "FactorizationError":
        """sweep 인덱스를 붙인 새 예외 반환"""
        base = str(self).split(" [", 1)[0]
        return FactorizationError(base, v_range=self.v_range, sweep=sweep)


class DegenerateChainError(BQRError, ValueError):
    """분산이 0인 체인 (KDE bandwidth 계산 불가)"""


class StudyAbortedError(BQRError):
    """실패한 replication 비율이 허용치를 초과"""
