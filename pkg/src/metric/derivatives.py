import numpy as np

from metric.interfaces import DerivativeProvider, MetricField, MetricJet


# (offset, weight) pairs of centered stencils
FIRST_STENCILS = {
    2: ((-1, -0.5), (1, 0.5)),
    4: ((-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)),
}
SECOND_STENCILS = {
    2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
    4: ((-2, -1.0 / 12.0), (-1, 16.0 / 12.0), (0, -30.0 / 12.0), (1, 16.0 / 12.0), (2, -1.0 / 12.0)),
}


class AnalyticDerivatives(DerivativeProvider):
    def jet(self, metric: MetricField, t, x, chart_id: str) -> MetricJet:
        jet = metric.analytic_jet(t, x, chart_id)
        jet.provider = self.record()
        return jet

    def record(self) -> dict:
        return {"provider": "analytic"}


class FiniteDifferenceDerivatives(DerivativeProvider):
    """
    Centered finite differences of n and g_ij in all four coordinates.

    The step is step_scale times the chart scale unless an absolute step is given.
    """

    def __init__(self, order: int = 4, step_scale: float = 1e-4, step: float | None = None):
        if order not in FIRST_STENCILS:
            raise ValueError(f"Unsupported stencil order {order}; use 2 or 4.")
        self.order = order
        self.step_scale = step_scale
        self.step = step

    def step_for(self, metric: MetricField, chart_id: str) -> float:
        if self.step is not None:
            return self.step
        return self.step_scale * metric.chart(chart_id).scale

    def record(self) -> dict:
        record = {"provider": "finite_difference", "order": self.order, "step_scale": self.step_scale}
        if self.step is not None:
            record["step"] = self.step
        return record

    def jet(self, metric: MetricField, t, x, chart_id: str) -> MetricJet:
        x = np.asarray(x, dtype=float)
        t = np.broadcast_to(np.asarray(t, dtype=float), x.shape[:-1])
        base = np.concatenate([t[..., None], x], axis=-1)
        h = self.step_for(metric, chart_id)
        first = FIRST_STENCILS[self.order]
        second = SECOND_STENCILS[self.order]

        def evaluate(offset: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
            y = base + offset
            return metric.lapse(y[..., 0], y[..., 1:], chart_id), metric.spatial_metric(y[..., 0], y[..., 1:], chart_id)

        n0, g0 = evaluate(np.zeros(4))
        batch = n0.shape
        dn = np.zeros(batch + (4,))
        ddn = np.zeros(batch + (4, 4))
        dg = np.zeros(batch + (4, 3, 3))
        ddg = np.zeros(batch + (4, 4, 3, 3))
        unit = np.eye(4)

        for mu in range(4):
            for offset, weight in first:
                n_val, g_val = evaluate(offset * h * unit[mu])
                dn[..., mu] += weight * n_val / h
                dg[..., mu, :, :] += weight * g_val / h
            for offset, weight in second:
                if offset == 0:
                    n_val, g_val = n0, g0
                else:
                    n_val, g_val = evaluate(offset * h * unit[mu])
                ddn[..., mu, mu] += weight * n_val / h**2
                ddg[..., mu, mu, :, :] += weight * g_val / h**2

        for mu in range(4):
            for nu in range(mu + 1, 4):
                n_acc = np.zeros(batch)
                g_acc = np.zeros(batch + (3, 3))
                for a, wa in first:
                    for b, wb in first:
                        n_val, g_val = evaluate(h * (a * unit[mu] + b * unit[nu]))
                        n_acc += wa * wb * n_val
                        g_acc += wa * wb * g_val
                ddn[..., mu, nu] = ddn[..., nu, mu] = n_acc / h**2
                ddg[..., mu, nu, :, :] = ddg[..., nu, mu, :, :] = g_acc / h**2

        return MetricJet(n=n0, dn=dn, ddn=ddn, g=g0, dg=dg, ddg=ddg, provider=self.record() | {"step": h})
