"""
Pydantic models for instances, file formats and run configuration
Everything read from or written to disk conforms to these schemas
"""
from __future__ import annotations
try:
    from pydantic.v1 import BaseModel, Field, StrictInt, validator
except ImportError:
    from pydantic import BaseModel, Field, StrictInt, validator
from typing import List, Optional, Dict, Any, Literal, Tuple, Union
from enum import Enum

# ==================== ENUMS ====================

class CostMode(str, Enum):
    RIDESHARING_DETOUR = "ridesharing_detour"
    RIDESOURCING_TOTAL = "ridesourcing_total"

class CostPolicy(str, Enum):
    ZERO = "zero"
    DIRECT = "direct"
    UPPER_BOUND = "upper_bound"

class Mechanism(str, Enum):
    UMS = "ums"
    WMS = "wms"
    VCG = "vcg"
    VCGS = "vcgs"

Coordinate = Union[StrictInt, float]

# Largest matrix entry; sums of a few entries stay inside int64
MATRIX_ENTRY_BOUND = 2 ** 60

# ==================== GEOMETRY ====================

class MatrixGeometry(BaseModel):
    type: Literal["matrix"] = "matrix"
    travel_time: List[List[int]] = Field(..., description="Seconds between nodes, (2n+2)x(2n+2)")
    travel_cost: List[List[int]] = Field(..., description="Micro-units between nodes, (2n+2)x(2n+2)")

    @validator('travel_time', 'travel_cost')
    def entries_bounded(cls, v, field):
        if any(abs(x) > MATRIX_ENTRY_BOUND for row in v for x in row):
            raise ValueError(f"{field.name} entries must lie within +-2**60")
        return v

class EuclideanGeometry(BaseModel):
    type: Literal["euclidean"] = "euclidean"
    speed_m_per_s: float = Field(..., gt=0, description="Driver speed in meters per second")
    cost_per_m: int = Field(..., ge=0, description="Driving cost in micro-units per meter")
    points: List[Tuple[Coordinate, Coordinate]] = Field(
        ..., description="Ordered [origin, p_1..p_n, d_1..d_n, destination], meters"
    )

    class Config:
        allow_mutation = False

# ==================== INSTANCE ====================

class PassengerRequest(BaseModel):
    id: int = Field(..., description="Passenger index in 1..n; pickup node = id, dropoff node = id + n")
    bid: int = Field(..., description="Bid b_i in micro-units")
    max_pickup_time: int = Field(..., description="Latest pickup instant k_i in seconds")
    max_travel_time: int = Field(..., description="Longest allowed ride l_i in seconds")

    class Config:
        allow_mutation = False

class Instance(BaseModel):
    """
    One driver and n passenger requests over a complete graph.

    Node 0 is the driver origin, nodes 1..n pickups, n+1..2n dropoffs and
    2n+1 the driver destination. Only types are enforced here; the
    structural rules are reported by models.instance.validate_instance.
    """
    n: int
    passengers: List[PassengerRequest]
    travel_time: List[List[int]]
    travel_cost: List[List[int]]
    depart_time: int = 0
    max_arrival: int
    capacity: int
    cost_mode: CostMode = CostMode.RIDESHARING_DETOUR
    geometry: Optional[EuclideanGeometry] = Field(
        None, description="Euclidean source of the matrices, kept so files stay compact"
    )

    class Config:
        allow_mutation = False

    @property
    def origin(self) -> int:
        return 0

    @property
    def destination(self) -> int:
        return 2 * self.n + 1

    @property
    def node_count(self) -> int:
        return 2 * self.n + 2

    def pickup(self, passenger: int) -> int:
        return passenger

    def dropoff(self, passenger: int) -> int:
        return passenger + self.n

    def passenger(self, passenger: int) -> PassengerRequest:
        return self.passengers[passenger - 1]

    def bids(self) -> Dict[int, int]:
        return {p.id: p.bid for p in self.passengers}

    def with_bids(self, bids: Dict[int, int]) -> "Instance":
        """Copy of the instance with some bids replaced"""
        passengers = [
            p.copy(update={'bid': bids[p.id]}) if p.id in bids else p
            for p in self.passengers
        ]
        return self.copy(update={'passengers': passengers})

# ==================== FILE FORMATS ====================

class PassengerSpec(BaseModel):
    id: int = Field(..., ge=1)
    bid: int = Field(..., ge=0, description="Micro-units")
    max_pickup_time: int
    max_travel_time: int = Field(..., ge=0)

class InstanceFile(BaseModel):
    version: Literal[1] = 1
    n: int = Field(..., ge=0)
    depart_time: int = Field(0, ge=0)
    max_arrival: int
    capacity: int = Field(..., ge=1, le=6)
    cost_mode: CostMode = CostMode.RIDESHARING_DETOUR
    geometry: Union[MatrixGeometry, EuclideanGeometry]
    passengers: List[PassengerSpec]

    @validator('passengers')
    def passengers_numbered(cls, v, values):
        n = values.get('n')
        if n is not None and [p.id for p in v] != list(range(1, n + 1)):
            raise ValueError(f"passenger ids must be 1..{n} in order")
        return v

    @validator('geometry')
    def geometry_size(cls, v, values):
        n = values.get('n')
        if n is None:
            return v
        size = 2 * n + 2
        if isinstance(v, EuclideanGeometry):
            if len(v.points) != size:
                raise ValueError(f"expected {size} points, got {len(v.points)}")
        else:
            for name in ('travel_time', 'travel_cost'):
                matrix = getattr(v, name)
                if len(matrix) != size or any(len(row) != size for row in matrix):
                    raise ValueError(f"{name} must be {size}x{size}")
        return v

class AlternativeSpec(BaseModel):
    members: List[int] = Field(..., description="Passenger ids served by the trip")
    surpluses: Dict[int, int] = Field(..., description="s_i for every member, micro-units")
    cost: int = Field(0, ge=0, description="cost(A); abstract trips default to 0")

    @validator('surpluses')
    def surpluses_cover_members(cls, v, values):
        members = values.get('members')
        if members is not None and set(v) != set(members):
            raise ValueError("surpluses must have exactly one entry per member")
        return v

class AbstractFamilyFile(BaseModel):
    alternatives: List[AlternativeSpec] = Field(default_factory=list)
    costs: Dict[int, int] = Field(default_factory=dict, description="c_i per passenger")

# ==================== CONFIGURATION ====================

class GeneratorConfig(BaseModel):
    n: int = Field(..., ge=1, description="Passenger count")
    sigma: float = Field(3.0, ge=0, description="Half-gaussian scale in money units (cost of 1 km)")
    seed: int = Field(0, ge=0, lt=2 ** 64)
    rect_width: int = Field(10_000, gt=0, description="Meters")
    rect_height: int = Field(10_000, gt=0, description="Meters")
    speed_m_per_s: float = Field(8.0, gt=0)
    cost_per_m: int = Field(1_000, ge=0, description="Micro-units per meter")
    capacity: int = Field(3, ge=1, le=6)
    pickup_window_min: int = Field(15, ge=0)
    travel_factor: int = Field(2, ge=1)
    depart_time: int = Field(0, ge=0)
    arrival_factor: int = Field(2, ge=1)
    arrival_slack_s: int = Field(1800, ge=0)
    bid_floor: CostPolicy = CostPolicy.UPPER_BOUND
    cost_mode: CostMode = CostMode.RIDESHARING_DETOUR

    class Config:
        allow_mutation = False

# ==================== OUTPUT DOCUMENTS ====================

class RationalValue(BaseModel):
    num: int
    den: int = Field(..., gt=0)

class WinnerDiagnosticsDoc(BaseModel):
    passenger: int
    premium: RationalValue = Field(..., description="p_i - c_i")
    values: Dict[str, Any] = Field(default_factory=dict)

class OutcomeDocument(BaseModel):
    mechanism: Mechanism
    winner: List[int]
    winner_cost: int
    prices: Dict[int, RationalValue]
    diagnostics: List[WinnerDiagnosticsDoc] = Field(default_factory=list)
    metrics: Dict[str, RationalValue]

class VerifySummary(BaseModel):
    suite: str
    seed: int
    samples: int
    checks: Dict[str, int] = Field(default_factory=dict, description="Checks performed per property")
    violations: Dict[str, int] = Field(default_factory=dict, description="Failures per property")
    failures: List[str] = Field(default_factory=list, description="Replayable failure descriptions")
    margins: Dict[str, str] = Field(default_factory=dict, description="Smallest slack per bound")
    informational: Dict[str, str] = Field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not any(self.violations.values())
