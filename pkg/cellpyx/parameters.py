"""
Parameter vectors of the two cell models, their flattening into identification
vectors, and their JSON persistence.

* PbmParams: 12 temperature-independent scalars and 6 segmented-Arrhenius
  properties (5 reference values + 5 activation energies each), i.e. 72 values
  to identify, plus fixed constants and the electrode OCP curves.
* EcmParams: 5 lookup tables (R0, R1, R2, C1, C2) over an 11 x 6 SOC x
  temperature grid, i.e. 330 values, plus the OCV surface and the charge
  efficiency.

Programmer: cellpyx team
Since: 2024-05
"""

import dataclasses
import json
import math
import pathlib
from dataclasses import dataclass

import numpy as np

from cellpyx.cells import (
    CellSpec, OcpCurve, OcvSurface, SegmentedArrhenius, frozen_array, REFERENCE_CELL,
    ECM_SOC_GRID, ECM_TEMP_GRID, FARADAY, ZERO_CELSIUS,
)
from cellpyx.hysteresis import HysteresisParams

import logging
logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


# (attribute, JSON key / identification name)
PBM_SCALARS = (
    ("electrode_area_A", "electrode_area_m2"),
    ("L_p", "L_p_m"),
    ("L_s", "L_s_m"),
    ("L_n", "L_n_m"),
    ("R_p", "R_p_m"),
    ("R_n", "R_n_m"),
    ("eps_e", "eps_e"),
    ("theta_n_0pct", "theta_n_0pct"),
    ("theta_n_100pct", "theta_n_100pct"),
    ("theta_p_0pct", "theta_p_0pct"),
    ("R_c", "R_c_ohm"),
    ("t0_plus", "t0_plus"),
)

PBM_CONSTANTS = (
    ("c_s_max_p", "c_s_max_p_mol_m3"),
    ("c_s_max_n", "c_s_max_n_mol_m3"),
    ("c_e0", "c_e0_mol_m3"),
    ("alpha", "alpha"),
    ("beta", "beta"),
    ("rho", "rho_V_m2_A"),
    ("theta_c", "theta_c"),
    ("mu_p", "mu_p_m3_mol"),
    ("mu_n", "mu_n_m3_mol"),
    ("bruggeman", "bruggeman"),
)

# (attribute, unit suffix of the reference values)
PBM_PROPERTIES = (
    ("D_s_p", "m2_s"),
    ("D_s_n", "m2_s"),
    ("D_e", "m2_s"),
    ("k0_p", "SI"),
    ("k0_n", "SI"),
    ("kappa", "S_m"),
)

NUM_OF_SEGMENTS = 5


def _property_names(attribute:str, unit:str) -> list:
    return [f"{attribute}_ref_seg{k+1}_{unit}" for k in range(NUM_OF_SEGMENTS)] \
         + [f"{attribute}_Ea_seg{k+1}_J_mol" for k in range(NUM_OF_SEGMENTS)]


def check_schema_version(data:dict, title:str):
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"{title}: unsupported schema version {version}, expected {SCHEMA_VERSION}.")


@dataclass(frozen=True)
class PbmParams:
    """
    Physics parameters of the reduced-order model.

    >>> params = reference_pbm_params()
    >>> len(params.to_vector()), len(PbmParams.vector_names())
    (72, 72)
    >>> round(params.theta_p_100pct, 4)
    0.1342
    >>> round(params.capacity_ah, 1)
    165.9
    """
    # temperature independent (identified)
    electrode_area_A: float      # m2
    L_p: float                   # m
    L_s: float                   # m
    L_n: float                   # m
    R_p: float                   # m
    R_n: float                   # m
    eps_e: float
    theta_n_0pct: float
    theta_n_100pct: float
    theta_p_0pct: float
    R_c: float                   # ohm
    t0_plus: float

    # temperature dependent (identified)
    D_s_p: SegmentedArrhenius    # m2/s
    D_s_n: SegmentedArrhenius    # m2/s
    D_e: SegmentedArrhenius      # m2/s
    k0_p: SegmentedArrhenius
    k0_n: SegmentedArrhenius
    kappa: SegmentedArrhenius    # S/m

    # electrode open-circuit potentials
    ocp_p: OcpCurve
    ocp_n: OcpCurve

    # fixed constants
    c_s_max_p: float = 22800.0   # mol/m3
    c_s_max_n: float = 31000.0   # mol/m3
    c_e0: float = 1200.0         # mol/m3
    alpha: float = 0.5
    beta: float = 0.3
    rho: float = 1e-3            # V m2/A
    theta_c: float = 0.5
    mu_p: float = 1e-4           # m3/mol
    mu_n: float = 2e-4           # m3/mol
    bruggeman: float = 1.5

    def __post_init__(self):
        title = "PbmParams"
        for attribute,_ in PBM_SCALARS + PBM_CONSTANTS:
            value = getattr(self, attribute)
            if not math.isfinite(value):
                raise ValueError(f"{title}: {attribute} must be finite, got {value}.")
        for attribute in ("electrode_area_A", "L_p", "L_s", "L_n", "R_p", "R_n", "c_s_max_p", "c_s_max_n", "c_e0", "bruggeman"):
            if not getattr(self, attribute) > 0:
                raise ValueError(f"{title}: {attribute} must be positive, got {getattr(self, attribute)}.")
        for attribute in ("R_c", "rho", "mu_p", "mu_n", "beta"):
            if getattr(self, attribute) < 0:
                raise ValueError(f"{title}: {attribute} must be non-negative, got {getattr(self, attribute)}.")
        for attribute in ("eps_e", "theta_n_0pct", "theta_n_100pct", "theta_p_0pct", "t0_plus", "alpha", "theta_c"):
            if not 0 < getattr(self, attribute) < 1:
                raise ValueError(f"{title}: {attribute} must lie in (0,1), got {getattr(self, attribute)}.")
        if not self.theta_n_0pct < self.theta_n_100pct:
            raise ValueError(f"{title}: theta_n_0pct={self.theta_n_0pct} must be below theta_n_100pct={self.theta_n_100pct}.")
        if not 0 < self.theta_p_100pct < self.theta_p_0pct:
            raise ValueError(f"{title}: derived theta_p_100pct={self.theta_p_100pct} must lie in (0, theta_p_0pct).")

    ### derived quantities

    @property
    def theta_p_100pct(self) -> float:
        """ Capacity balance: lithium leaving the negative window fills the positive one. """
        swing_n = (self.theta_n_100pct - self.theta_n_0pct) * self.c_s_max_n * self.L_n
        return self.theta_p_0pct - swing_n / (self.c_s_max_p * self.L_p)

    @property
    def a_p(self) -> float:
        """ Specific interfacial area of the positive electrode (1/m). """
        return 3 * (1 - self.eps_e) / self.R_p

    @property
    def a_n(self) -> float:
        return 3 * (1 - self.eps_e) / self.R_n

    @property
    def cell_length(self) -> float:
        return self.L_p + self.L_s + self.L_n

    @property
    def capacity_ah(self) -> float:
        """ Cyclable capacity of the negative-electrode window (Ah). """
        solid_volume = (1 - self.eps_e) * self.electrode_area_A * self.L_n
        moles = (self.theta_n_100pct - self.theta_n_0pct) * self.c_s_max_n * solid_volume
        return moles * FARADAY / 3600

    def theta_n(self, soc:float) -> float:
        return (1-soc) * self.theta_n_0pct + soc * self.theta_n_100pct

    def theta_p(self, soc:float) -> float:
        return (1-soc) * self.theta_p_0pct + soc * self.theta_p_100pct

    def open_circuit_voltage(self, soc:float) -> float:
        """ U_p - U_n at the equilibrium stoichiometries of the given SOC. """
        return self.ocp_p(self.theta_p(soc)) - self.ocp_n(self.theta_n(soc))

    ### identification vector

    @staticmethod
    def vector_names() -> list:
        names = [name for _,name in PBM_SCALARS]
        for attribute,unit in PBM_PROPERTIES:
            names += _property_names(attribute, unit)
        return names

    def to_vector(self) -> np.ndarray:
        values = [getattr(self, attribute) for attribute,_ in PBM_SCALARS]
        for attribute,_ in PBM_PROPERTIES:
            prop = getattr(self, attribute)
            values += list(prop.ref_values) + list(prop.activation_energies)
        return np.array(values, dtype=float)

    def with_vector(self, vector) -> "PbmParams":
        """
        A copy of these parameters with the 72 identified values replaced.

        >>> params = reference_pbm_params()
        >>> vector = params.to_vector()
        >>> bool(np.array_equal(params.with_vector(vector).to_vector(), vector))
        True
        >>> params.with_vector(vector[:10])
        Traceback (most recent call last):
        ...
        ValueError: PbmParams: identification vector has 10 entries, expected 72.
        """
        vector = np.asarray(vector, dtype=float)
        expected = len(PBM_SCALARS) + 2*NUM_OF_SEGMENTS*len(PBM_PROPERTIES)
        if vector.shape != (expected,):
            raise ValueError(f"PbmParams: identification vector has {vector.size} entries, expected {expected}.")
        changes = {attribute: float(vector[i]) for i,(attribute,_) in enumerate(PBM_SCALARS)}
        offset = len(PBM_SCALARS)
        for attribute,_ in PBM_PROPERTIES:
            chunk = vector[offset: offset + 2*NUM_OF_SEGMENTS]
            offset += 2*NUM_OF_SEGMENTS
            changes[attribute] = SegmentedArrhenius(
                ref_values=tuple(chunk[:NUM_OF_SEGMENTS]),
                activation_energies=tuple(chunk[NUM_OF_SEGMENTS:]),
                ref_temps_c=getattr(self, attribute).ref_temps_c)
        return dataclasses.replace(self, **changes)

    ### persistence

    def to_dict(self) -> dict:
        return {
            "scalars": {name: getattr(self, attribute) for attribute,name in PBM_SCALARS},
            "constants": {name: getattr(self, attribute) for attribute,name in PBM_CONSTANTS},
            "properties": {attribute: getattr(self, attribute).to_dict() for attribute,_ in PBM_PROPERTIES},
            "ocp_p": self.ocp_p.to_dict(),
            "ocp_n": self.ocp_n.to_dict(),
        }

    @staticmethod
    def from_dict(data:dict) -> "PbmParams":
        kwargs = {attribute: float(data["scalars"][name]) for attribute,name in PBM_SCALARS}
        kwargs.update({attribute: float(data["constants"][name]) for attribute,name in PBM_CONSTANTS if name in data.get("constants", {})})
        kwargs.update({attribute: SegmentedArrhenius.from_dict(data["properties"][attribute]) for attribute,_ in PBM_PROPERTIES})
        kwargs["ocp_p"] = OcpCurve.from_dict(data["ocp_p"])
        kwargs["ocp_n"] = OcpCurve.from_dict(data["ocp_n"])
        return PbmParams(**kwargs)


def soc_from_bulk_concentration(c_bulk_n:float, params:PbmParams) -> float:
    """
    Map the negative-electrode bulk concentration to the SOC axis.

    >>> params = reference_pbm_params()
    >>> soc_from_bulk_concentration(params.theta_n_0pct * params.c_s_max_n, params)
    0.0
    >>> soc_from_bulk_concentration(params.theta_n_100pct * params.c_s_max_n, params)
    1.0
    >>> mid = (params.theta_n_0pct + params.theta_n_100pct) / 2
    >>> round(soc_from_bulk_concentration(mid * params.c_s_max_n, params), 12)
    0.5
    >>> soc_from_bulk_concentration(0.0, params)
    0.0
    """
    theta_n = c_bulk_n / params.c_s_max_n
    soc = (theta_n - params.theta_n_0pct) / (params.theta_n_100pct - params.theta_n_0pct)
    return float(min(max(soc, 0.0), 1.0))


ECM_TABLES = (
    ("r0", "R0_ohm"),
    ("r1", "R1_ohm"),
    ("r2", "R2_ohm"),
    ("c1", "C1_F"),
    ("c2", "C2_F"),
)
ECM_EXTRAS = ("eta_charge",)


@dataclass(frozen=True)
class EcmParams:
    """
    Lookup tables of the second-order RC model. Each table has one row per SOC
    grid point and one column per temperature grid point.

    >>> params = reference_ecm_params()
    >>> len(params.to_vector()), len(params.to_vector(include_extras=True))
    (330, 331)
    >>> EcmParams.vector_names()[:2]
    ['R0_ohm_soc0.0_T-20', 'R0_ohm_soc0.0_T-5']
    """
    r0: np.ndarray        # ohm
    r1: np.ndarray        # ohm
    r2: np.ndarray        # ohm
    c1: np.ndarray        # F
    c2: np.ndarray        # F
    ocv: OcvSurface
    eta_charge: float = 1.0
    soc_grid: tuple = ECM_SOC_GRID
    temp_grid: tuple = ECM_TEMP_GRID

    def __post_init__(self):
        soc_grid = tuple(float(x) for x in self.soc_grid)
        temp_grid = tuple(float(x) for x in self.temp_grid)
        object.__setattr__(self, "soc_grid", soc_grid)
        object.__setattr__(self, "temp_grid", temp_grid)
        shape = (len(soc_grid), len(temp_grid))
        for attribute,name in ECM_TABLES:
            table = frozen_array(getattr(self, attribute), "EcmParams", name, ndim=2)
            if table.shape != shape:
                raise ValueError(f"EcmParams: table {name} has shape {table.shape}, expected {shape}.")
            if not np.all(table > 0):
                raise ValueError(f"EcmParams: table {name} must be positive everywhere.")
            object.__setattr__(self, attribute, table)
            # plain nested lists are faster than numpy for scalar lookups
            object.__setattr__(self, f"_{attribute}_rows", table.tolist())
        if not 0 < self.eta_charge <= 1:
            raise ValueError(f"EcmParams: eta_charge must be in (0,1], got {self.eta_charge}.")

    def rows(self, attribute:str) -> list:
        return getattr(self, f"_{attribute}_rows")

    @staticmethod
    def vector_names(soc_grid=ECM_SOC_GRID, temp_grid=ECM_TEMP_GRID, include_extras:bool=False) -> list:
        names = [
            f"{name}_soc{soc:.1f}_T{temp:g}"
            for _,name in ECM_TABLES for soc in soc_grid for temp in temp_grid
        ]
        return names + list(ECM_EXTRAS) if include_extras else names

    def to_vector(self, include_extras:bool=False) -> np.ndarray:
        vector = np.concatenate([getattr(self, attribute).ravel() for attribute,_ in ECM_TABLES])
        if include_extras:
            vector = np.append(vector, self.eta_charge)
        return vector

    def with_vector(self, vector) -> "EcmParams":
        """
        A copy with the 330 table values (and optionally eta_charge) replaced.

        >>> params = reference_ecm_params()
        >>> vector = params.to_vector(include_extras=True)
        >>> vector[-1] = 0.98
        >>> params.with_vector(vector).eta_charge
        0.98
        """
        vector = np.asarray(vector, dtype=float)
        shape = (len(self.soc_grid), len(self.temp_grid))
        size = shape[0] * shape[1]
        n_tables = size * len(ECM_TABLES)
        if vector.ndim != 1 or len(vector) not in (n_tables, n_tables + len(ECM_EXTRAS)):
            raise ValueError(f"EcmParams: identification vector has {vector.size} entries, expected {n_tables} or {n_tables + len(ECM_EXTRAS)}.")
        changes = {
            attribute: vector[k*size:(k+1)*size].reshape(shape)
            for k,(attribute,_) in enumerate(ECM_TABLES)
        }
        if len(vector) > n_tables:
            changes["eta_charge"] = float(vector[n_tables])
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        data = {
            "soc_grid": list(self.soc_grid),
            "temp_grid_C": list(self.temp_grid),
            "eta_charge": self.eta_charge,
            "ocv": self.ocv.to_dict(),
        }
        data.update({name: getattr(self, attribute).tolist() for attribute,name in ECM_TABLES})
        return data

    @staticmethod
    def from_dict(data:dict) -> "EcmParams":
        return EcmParams(
            ocv=OcvSurface.from_dict(data["ocv"]),
            eta_charge=float(data.get("eta_charge", 1.0)),
            soc_grid=tuple(data.get("soc_grid", ECM_SOC_GRID)),
            temp_grid=tuple(data.get("temp_grid_C", ECM_TEMP_GRID)),
            **{attribute: data[name] for attribute,name in ECM_TABLES})


@dataclass(frozen=True)
class ModelDocument:
    """
    The canonical persisted form of a calibrated model: the cell ratings,
    the model parameters and the shared hysteresis parameters.
    """
    kind: str                      # "pbm" or "ecm"
    spec: CellSpec
    params: object                 # PbmParams or EcmParams
    hysteresis: object             # HysteresisParams

    def __post_init__(self):
        if self.kind not in ("pbm", "ecm"):
            raise ValueError(f"ModelDocument: kind must be 'pbm' or 'ecm', got {self.kind!r}.")

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "cell": self.spec.to_dict(),
            "params": self.params.to_dict(),
            "hysteresis": self.hysteresis.to_dict(),
        }

    @staticmethod
    def from_dict(data:dict, title:str="model") -> "ModelDocument":
        check_schema_version(data, title)
        kind = data.get("kind")
        if kind == "pbm":
            params = PbmParams.from_dict(data["params"])
        elif kind == "ecm":
            params = EcmParams.from_dict(data["params"])
        else:
            raise ValueError(f"{title}: unknown model kind {kind!r}.")
        return ModelDocument(kind, CellSpec.from_dict(data["cell"]), params, HysteresisParams.from_dict(data["hysteresis"]))

    def save(self, path):
        path = pathlib.Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2))
        logger.info("Saved %s model to %s", self.kind, path)

    @staticmethod
    def load(path) -> "ModelDocument":
        path = pathlib.Path(path)
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as err:
            raise ValueError(f"{path}: not valid JSON: {err}") from err
        return ModelDocument.from_dict(data, title=str(path))


#### Reference cell: a 166 Ah LFP/graphite cell with smooth analytic OCP curves.

def lfp_ocp(theta:float) -> float:
    """ Positive-electrode OCP (V vs Li/Li+): a flat plateau with steep ends. """
    return 3.42 - 0.02*(theta - 0.5) + 0.30*math.exp(-40*theta) - 0.80*math.exp(-60*(1 - theta))


def graphite_ocp(theta:float) -> float:
    """ Negative-electrode OCP (V vs Li/Li+). """
    return (1.9793*math.exp(-39.3631*theta) + 0.2482
        - 0.0909*math.tanh(29.8538*(theta - 0.1234))
        - 0.04478*math.tanh(14.9159*(theta - 0.2769))
        - 0.0205*math.tanh(30.4444*(theta - 0.6103)))


def reference_pbm_params(**overrides) -> PbmParams:
    """ Reference parameters of the synthetic cell; keyword arguments override scalars. """
    kwargs = dict(
        electrode_area_A=6.4, L_p=80e-6, L_s=20e-6, L_n=60e-6, R_p=0.5e-6, R_n=5e-6,
        eps_e=0.35, theta_n_0pct=0.05, theta_n_100pct=0.85, theta_p_0pct=0.95,
        R_c=1e-4, t0_plus=0.38,
        D_s_p=SegmentedArrhenius.from_reference(1e-15, 25.0, (40000, 35000, 30000, 28000, 25000)),
        D_s_n=SegmentedArrhenius.from_reference(3e-14, 25.0, (35000, 32000, 30000, 28000, 26000)),
        D_e=SegmentedArrhenius.from_reference(3e-10, 25.0, (18000, 16000, 15000, 14000, 13000)),
        k0_p=SegmentedArrhenius.from_reference(1e-11, 25.0, (50000, 45000, 40000, 35000, 30000)),
        k0_n=SegmentedArrhenius.from_reference(2e-11, 25.0, (60000, 55000, 50000, 45000, 40000)),
        kappa=SegmentedArrhenius.from_reference(1.0, 25.0, (20000, 18000, 15000, 12000, 10000)),
        ocp_p=OcpCurve.from_function(lfp_ocp),
        ocp_n=OcpCurve.from_function(graphite_ocp),
    )
    kwargs.update(overrides)
    return PbmParams(**kwargs)


def pbm_ocv_surface(params:PbmParams, soc_grid=ECM_SOC_GRID, temp_grid=ECM_TEMP_GRID) -> OcvSurface:
    """
    The equilibrium OCV of a physics parameter set, tabulated on a SOC x temperature grid.

    >>> params = reference_pbm_params()
    >>> surface = pbm_ocv_surface(params)
    >>> bool(np.isclose(surface(1.0, 25.0), params.open_circuit_voltage(1.0)))
    True
    """
    column = np.array([params.open_circuit_voltage(soc) for soc in soc_grid])
    return OcvSurface(soc_grid, temp_grid, np.tile(column[:,None], (1, len(temp_grid))))


def _temperature_factor(temp_c:float, activation_temp_k:float=3000.0) -> float:
    return math.exp(activation_temp_k * (1/(temp_c + ZERO_CELSIUS) - 1/298.15))


def reference_ecm_params(soc_grid=ECM_SOC_GRID, temp_grid=ECM_TEMP_GRID) -> EcmParams:
    """ Reference RC tables: resistances grow at low SOC and low temperature. """
    shape = (len(soc_grid), len(temp_grid))
    r0, r1, r2 = np.empty(shape), np.empty(shape), np.empty(shape)
    for i,soc in enumerate(soc_grid):
        for j,temp in enumerate(temp_grid):
            factor = _temperature_factor(temp)
            r0[i,j] = 0.35e-3 * factor * (1 + 0.5*math.exp(-soc/0.08))
            r1[i,j] = 0.2e-3 * factor * (1 + 0.3*math.exp(-soc/0.1))
            r2[i,j] = 0.4e-3 * factor
    tau1, tau2 = 20.0, 300.0
    return EcmParams(
        r0=r0, r1=r1, r2=r2, c1=tau1/r1, c2=tau2/r2,
        ocv=pbm_ocv_surface(reference_pbm_params(), soc_grid, temp_grid),
        eta_charge=1.0, soc_grid=soc_grid, temp_grid=temp_grid)


if __name__ == "__main__":
    import doctest, sys
    logger.addHandler(logging.StreamHandler(sys.stdout))
    logger.setLevel(logging.INFO)
    print(doctest.testmod())
