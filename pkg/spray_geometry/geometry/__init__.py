"""Pointwise nonlinear-connection geometry on the tangent bundle."""

from spray_geometry.geometry.connections import (
    Formulation,
    ObataPair,
    apply_semispray,
    compatible_connection,
    connection_from_semispray,
    family_member,
    family_projector_residual,
    helmholtz_residual,
    horizontal_semispray,
    induced_connection,
    metric_connection,
    metric_connection_field,
    metric_connection_forms,
    metric_semispray_derivative,
    nabla_metric,
    nabla_vertical,
    obata_operators,
)
from spray_geometry.geometry.fields import (
    ConnectionField,
    ConnectionValue,
    GLMetricField,
    MetricValue,
    Semispray,
    SemisprayField,
    Tensor11,
    connection_at,
    factor_metric,
)
from spray_geometry.geometry.frames import (
    AdaptedFrameValue,
    adapted_frame,
    almost_hermitian,
    hermitian_residual,
)
from spray_geometry.geometry.lagrange import (
    CanonicSemispray,
    LagrangeSpace,
    canonic_connection,
    canonic_semispray,
    cartan_form,
    energy,
    energy_form_residual,
    euler_lagrange_residual,
    lagrange_family_member,
    lagrange_metric,
    symplectic_adapted,
    unique_connection,
)

__all__ = [
    "AdaptedFrameValue",
    "CanonicSemispray",
    "ConnectionField",
    "ConnectionValue",
    "Formulation",
    "GLMetricField",
    "LagrangeSpace",
    "MetricValue",
    "ObataPair",
    "Semispray",
    "SemisprayField",
    "Tensor11",
    "adapted_frame",
    "almost_hermitian",
    "apply_semispray",
    "canonic_connection",
    "canonic_semispray",
    "cartan_form",
    "compatible_connection",
    "connection_at",
    "connection_from_semispray",
    "energy",
    "energy_form_residual",
    "euler_lagrange_residual",
    "factor_metric",
    "family_member",
    "family_projector_residual",
    "hermitian_residual",
    "horizontal_semispray",
    "induced_connection",
    "lagrange_family_member",
    "lagrange_metric",
    "metric_connection",
    "metric_connection_field",
    "metric_connection_forms",
    "metric_semispray_derivative",
    "nabla_metric",
    "nabla_vertical",
    "obata_operators",
    "symplectic_adapted",
    "unique_connection",
]
