def _omega_str(omega):
    return f"{omega:.6f}".replace(".", "p")


def get_simulation_output_key(model, omega, steps):
    return f"{model}/simulate/omega{_omega_str(omega)}_n{steps}.csv"


def get_sweep_output_key(grid, steps, model="eq22"):
    return f"{model}/sweep/grid{grid}_n{steps}.csv"


def get_classical_output_key(p0, p, steps):
    return f"classical/simulate/p0{_omega_str(p0)}_p{_omega_str(p)}_n{steps}.csv"


def get_series_output_key(omega, order):
    return f"series/omega{_omega_str(omega)}_order{order}.csv"


def get_verify_report_key(tolerance):
    return f"verify/report_tol{tolerance:.0e}.csv"
