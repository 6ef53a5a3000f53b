"""Root data, loop-algebra letters and graded highest-weight modules."""

from .lie import AlgebraData, SlnRealization, WeightVector, build_algebra, langlands_dual
from .modules import (
    D_IDX,
    K_IDX,
    GradedModule,
    LoopAlgebra,
    QuotientModule,
    ShapovalovGram,
    TensorModule,
    VermaModule,
    build_module,
    shapovalov,
    tensor,
)

__all__ = [
    "AlgebraData", "SlnRealization", "WeightVector", "build_algebra", "langlands_dual",
    "D_IDX", "K_IDX", "GradedModule", "LoopAlgebra", "QuotientModule", "ShapovalovGram",
    "TensorModule", "VermaModule", "build_module", "shapovalov", "tensor",
]
