class Log:
    @staticmethod
    def log_title(msg: str) -> None:
        log_output = f"\n{'':=<{len(msg)}}\n{msg}\n{'':=<{len(msg)}}"
        print(log_output, flush=True)

    def log(self, msg: str | None = "") -> None:
        print(msg, flush=True)

    def log_rates(self, label: str, rates) -> None:
        self.log(
            f"{label}: R_X={rates.r_exchange:.6f} "
            f"(MA {rates.c_ma_1:.6f}/{rates.c_ma_2:.6f}/{rates.c_ma_sum / 2:.6f}, "
            f"BC {rates.c_bc_1:.6f}/{rates.c_bc_2:.6f})"
        )
