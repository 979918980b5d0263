"""Link catalog: standard decompositions of rank-one fibre spaces, the
numerical classification of links, and replayable mutation scripts."""

from ..mutation import serre_power_match
from .core import (
    LinkDescriptor,
    MoriFibreSpace,
    apply_divisor_matrix,
    birationally_rich,
    e_bundle_class,
    geiser_bertini_involution,
    opaque_block_for,
    orthogonal_span,
    sigma_kclass,
    standard_sod,
    validate_link,
)
from .scripts import LinkScript, catalog_ids, link_script, verify_link

__all__ = [
    "LinkDescriptor",
    "LinkScript",
    "MoriFibreSpace",
    "apply_divisor_matrix",
    "birationally_rich",
    "catalog_ids",
    "e_bundle_class",
    "geiser_bertini_involution",
    "link_script",
    "opaque_block_for",
    "orthogonal_span",
    "serre_power_match",
    "sigma_kclass",
    "standard_sod",
    "validate_link",
    "verify_link",
]
