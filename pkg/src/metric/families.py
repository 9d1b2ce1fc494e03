import math

import numpy as np

from metric.interfaces import ChartDescriptor, DerivativeProvider, MetricField, MetricJet


def _batch(t, x) -> tuple[np.ndarray, np.ndarray, tuple[int, ...]]:
    x = np.asarray(x, dtype=float)
    t = np.broadcast_to(np.asarray(t, dtype=float), x.shape[:-1])
    return t, x, x.shape[:-1]


def _identity(shape: tuple[int, ...]) -> np.ndarray:
    return np.broadcast_to(np.eye(3), shape + (3, 3)).copy()


def _zero_jet(n: np.ndarray, g: np.ndarray) -> MetricJet:
    shape = n.shape
    return MetricJet(
        n=n,
        dn=np.zeros(shape + (4,)),
        ddn=np.zeros(shape + (4, 4)),
        g=g,
        dg=np.zeros(shape + (4, 3, 3)),
        ddg=np.zeros(shape + (4, 4, 3, 3)),
    )


class Minkowski(MetricField):
    family = "minkowski"
    vacuum = True
    static = True

    def __init__(self, interval, derivatives: DerivativeProvider | None = None):
        super().__init__((ChartDescriptor(),), interval, derivatives)

    def lapse(self, t, x, chart_id="main"):
        _, _, shape = _batch(t, x)
        return np.ones(shape)

    def spatial_metric(self, t, x, chart_id="main"):
        _, _, shape = _batch(t, x)
        return _identity(shape)

    def analytic_jet(self, t, x, chart_id="main"):
        return _zero_jet(self.lapse(t, x), self.spatial_metric(t, x))


class ConstantLapse(Minkowski):
    """Flat spacetime written with a constant lapse, g = -n^2 dt^2 + delta."""

    family = "constant_lapse"

    def __init__(self, interval, lapse: float = 2.0, derivatives: DerivativeProvider | None = None):
        super().__init__(interval, derivatives)
        self.lapse_value = float(lapse)
        self.params = {"lapse": self.lapse_value}

    def lapse(self, t, x, chart_id="main"):
        _, _, shape = _batch(t, x)
        return np.full(shape, self.lapse_value)


class FlatTorus(MetricField):
    family = "flat_torus"
    vacuum = True
    static = True

    def __init__(self, interval, period: float = 1.0, derivatives: DerivativeProvider | None = None):
        period = float(period)
        chart = ChartDescriptor(
            chart_id="main", lower=(0.0, 0.0, 0.0), upper=(period,) * 3, periods=(period,) * 3, scale=period
        )
        super().__init__((chart,), interval, derivatives, {"period": period})
        self.period = period

    def lapse(self, t, x, chart_id="main"):
        _, _, shape = _batch(t, x)
        return np.ones(shape)

    def spatial_metric(self, t, x, chart_id="main"):
        _, _, shape = _batch(t, x)
        return _identity(shape)

    def analytic_jet(self, t, x, chart_id="main"):
        return _zero_jet(self.lapse(t, x), self.spatial_metric(t, x))


class LapseBump(MetricField):
    """Perturbed Minkowski: n = 1 + a exp(-|x - c|^2 / w^2), g = delta."""

    family = "lapse_bump"
    static = True

    def __init__(
        self,
        interval,
        amplitude: float = 0.01,
        width: float = 1.0,
        center=(0.0, 0.0, 0.0),
        derivatives: DerivativeProvider | None = None,
    ):
        self.amplitude = float(amplitude)
        self.width = float(width)
        self.center = np.asarray(center, dtype=float)
        super().__init__(
            (ChartDescriptor(scale=self.width),),
            interval,
            derivatives,
            {"amplitude": self.amplitude, "width": self.width, "center": self.center.tolist()},
        )

    def _profile(self, x):
        d = x - self.center
        return self.amplitude * np.exp(-np.sum(d * d, axis=-1) / self.width**2), d

    def lapse(self, t, x, chart_id="main"):
        _, x, _ = _batch(t, x)
        bump, _ = self._profile(x)
        return 1.0 + bump

    def spatial_metric(self, t, x, chart_id="main"):
        _, _, shape = _batch(t, x)
        return _identity(shape)

    def analytic_jet(self, t, x, chart_id="main"):
        _, x, shape = _batch(t, x)
        bump, d = self._profile(x)
        jet = _zero_jet(1.0 + bump, _identity(shape))
        w2 = self.width**2
        jet.dn[..., 1:] = bump[..., None] * (-2.0 * d / w2)
        jet.ddn[..., 1:, 1:] = bump[..., None, None] * (
            4.0 * d[..., :, None] * d[..., None, :] / w2**2 - 2.0 * np.eye(3) / w2
        )
        return jet


class ExponentialMetric(MetricField):
    """Shrinking slices g = exp(-2 rate t) delta with unit lapse."""

    family = "exponential"

    def __init__(self, interval, rate: float = 1.0, derivatives: DerivativeProvider | None = None):
        self.rate = float(rate)
        super().__init__((ChartDescriptor(),), interval, derivatives, {"rate": self.rate})

    def lapse(self, t, x, chart_id="main"):
        _, _, shape = _batch(t, x)
        return np.ones(shape)

    def spatial_metric(self, t, x, chart_id="main"):
        t, _, shape = _batch(t, x)
        return np.exp(-2.0 * self.rate * t)[..., None, None] * _identity(shape)

    def analytic_jet(self, t, x, chart_id="main"):
        g = self.spatial_metric(t, x)
        jet = _zero_jet(self.lapse(t, x), g)
        jet.dg[..., 0, :, :] = -2.0 * self.rate * g
        jet.ddg[..., 0, 0, :, :] = 4.0 * self.rate**2 * g
        return jet


class SphericalCylinder(MetricField):
    """
    Static product R_t x S^2 x R_z with g = R^2 (dtheta^2 + sin^2 theta dphi^2) + dz^2.

    Chart "A" puts the sphere's pole on the Z axis of the embedding, chart "B" on the X axis.
    Both use (theta, phi, z); a ray closer than cap_angle to a pole moves to the other chart.
    """

    family = "spherical_cylinder"
    static = True

    def __init__(
        self,
        interval,
        radius: float = 1.0,
        theta_min: float = 1e-3,
        cap_angle: float = 0.25,
        derivatives: DerivativeProvider | None = None,
    ):
        self.radius = float(radius)
        self.theta_min = float(theta_min)
        self.cap_angle = float(cap_angle)
        charts = tuple(
            ChartDescriptor(
                chart_id=chart_id,
                lower=(self.theta_min, 0.0, -math.inf),
                upper=(math.pi - self.theta_min, 2.0 * math.pi, math.inf),
                periods=(None, 2.0 * math.pi, None),
                scale=1.0,
            )
            for chart_id in ("A", "B")
        )
        super().__init__(
            charts,
            interval,
            derivatives,
            {"radius": self.radius, "theta_min": self.theta_min, "cap_angle": self.cap_angle},
        )

    def lapse(self, t, x, chart_id="A"):
        _, _, shape = _batch(t, x)
        return np.ones(shape)

    def spatial_metric(self, t, x, chart_id="A"):
        _, x, shape = _batch(t, x)
        g = np.zeros(shape + (3, 3))
        g[..., 0, 0] = self.radius**2
        g[..., 1, 1] = (self.radius * np.sin(x[..., 0])) ** 2
        g[..., 2, 2] = 1.0
        return g

    def analytic_jet(self, t, x, chart_id="A"):
        _, x, _ = _batch(t, x)
        jet = _zero_jet(self.lapse(t, x), self.spatial_metric(t, x))
        theta = x[..., 0]
        jet.dg[..., 1, 1, 1] = self.radius**2 * np.sin(2.0 * theta)
        jet.ddg[..., 1, 1, 1, 1] = 2.0 * self.radius**2 * np.cos(2.0 * theta)
        return jet

    @staticmethod
    def _unit(theta, phi, chart_id):
        s, c = np.sin(theta), np.cos(theta)
        if chart_id == "A":
            return np.stack([s * np.cos(phi), s * np.sin(phi), c], axis=-1)
        return np.stack([c, s * np.cos(phi), s * np.sin(phi)], axis=-1)

    @staticmethod
    def _angles(unit, chart_id):
        unit = np.clip(unit, -1.0, 1.0)
        if chart_id == "A":
            return np.arccos(unit[..., 2]), np.mod(np.arctan2(unit[..., 1], unit[..., 0]), 2.0 * math.pi)
        return np.arccos(unit[..., 0]), np.mod(np.arctan2(unit[..., 2], unit[..., 1]), 2.0 * math.pi)

    @staticmethod
    def _sphere_jacobian(theta, phi, chart_id):
        s, c = math.sin(theta), math.cos(theta)
        sp, cp = math.sin(phi), math.cos(phi)
        if chart_id == "A":
            return np.array([[c * cp, -s * sp], [c * sp, s * cp], [-s, 0.0]])
        return np.array([[-s, 0.0], [c * cp, -s * sp], [c * sp, s * cp]])

    def chart_events(self, chart_id):
        threshold = math.sin(self.cap_angle)
        return [lambda x: math.sin(x[0]) - threshold]

    def transition(self, chart_id, x):
        target = "B" if chart_id == "A" else "A"
        x = np.asarray(x, dtype=float)
        unit = self._unit(x[0], x[1], chart_id)
        theta, phi = self._angles(unit, target)
        old = self._sphere_jacobian(x[0], x[1], chart_id)
        new = self._sphere_jacobian(float(theta), float(phi), target)
        # new has orthogonal columns, so the least-squares inverse is a scaled transpose
        inverse = new.T / np.sum(new * new, axis=0)[:, None]
        jacobian = np.eye(3)
        jacobian[:2, :2] = inverse @ old
        return target, np.array([float(theta), float(phi), x[2]]), jacobian

    def embed(self, x, chart_id="A"):
        x = np.asarray(x, dtype=float)
        unit = self._unit(x[..., 0], x[..., 1], chart_id)
        return np.concatenate([self.radius * unit, x[..., 2:3]], axis=-1)

    def embed_periods(self, chart_id="A"):
        return (None, None, None, None)

    def separation(self, t, x1, chart1, x2, chart2):
        p1 = self.embed(x1, chart1)
        p2 = self.embed(x2, chart2)
        chord = np.linalg.norm(p1[:3] - p2[:3]) / self.radius
        arc = self.radius * 2.0 * math.asin(min(chord / 2.0, 1.0))
        return float(math.hypot(arc, p1[3] - p2[3]))


class PerturbedTorus(MetricField):
    """
    Flat torus with a lapse ripple n = 1 + a b(x), b = prod cos(2 pi x_i / L).

    A nonzero drift makes the slices evolve, g = (1 + drift t b(x)) delta.
    """

    family = "perturbed_torus"

    def __init__(
        self,
        interval,
        period: float = 1.0,
        amplitude: float = 0.01,
        drift: float = 0.0,
        derivatives: DerivativeProvider | None = None,
    ):
        self.period = float(period)
        self.amplitude = float(amplitude)
        self.drift = float(drift)
        self.static = self.drift == 0.0
        chart = ChartDescriptor(
            chart_id="main",
            lower=(0.0, 0.0, 0.0),
            upper=(self.period,) * 3,
            periods=(self.period,) * 3,
            scale=self.period,
        )
        super().__init__(
            (chart,),
            interval,
            derivatives,
            {"period": self.period, "amplitude": self.amplitude, "drift": self.drift},
        )

    def _ripple(self, x):
        k = 2.0 * math.pi / self.period
        c = np.cos(k * x)
        s = np.sin(k * x)
        b = np.prod(c, axis=-1)
        shape = x.shape[:-1]
        db = np.zeros(shape + (3,))
        ddb = np.zeros(shape + (3, 3))
        for i in range(3):
            others = [j for j in range(3) if j != i]
            db[..., i] = -k * s[..., i] * c[..., others[0]] * c[..., others[1]]
            ddb[..., i, i] = -k * k * b
            for j in others:
                (rest,) = [m for m in range(3) if m not in (i, j)]
                ddb[..., i, j] = k * k * s[..., i] * s[..., j] * c[..., rest]
        return b, db, ddb

    def lapse(self, t, x, chart_id="main"):
        _, x, _ = _batch(t, x)
        b, _, _ = self._ripple(x)
        return 1.0 + self.amplitude * b

    def spatial_metric(self, t, x, chart_id="main"):
        t, x, shape = _batch(t, x)
        b, _, _ = self._ripple(x)
        return (1.0 + self.drift * t * b)[..., None, None] * _identity(shape)

    def analytic_jet(self, t, x, chart_id="main"):
        t, x, shape = _batch(t, x)
        b, db, ddb = self._ripple(x)
        eye = _identity(shape)
        jet = _zero_jet(1.0 + self.amplitude * b, (1.0 + self.drift * t * b)[..., None, None] * eye)
        jet.dn[..., 1:] = self.amplitude * db
        jet.ddn[..., 1:, 1:] = self.amplitude * ddb
        jet.dg[..., 0, :, :] = (self.drift * b)[..., None, None] * eye
        jet.dg[..., 1:, :, :] = (self.drift * t)[..., None, None, None] * db[..., :, None, None] * eye[..., None, :, :]
        mixed = self.drift * db[..., :, None, None] * eye[..., None, :, :]
        jet.ddg[..., 0, 1:, :, :] = mixed
        jet.ddg[..., 1:, 0, :, :] = mixed
        jet.ddg[..., 1:, 1:, :, :] = (
            (self.drift * t)[..., None, None, None, None] * ddb[..., :, :, None, None] * eye[..., None, None, :, :]
        )
        return jet
