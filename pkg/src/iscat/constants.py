"""Physical constants and reference geometry for the builtin test scenes.

The builtin scatterer profiles are the repository's reference truth: their
dimensions are fixed here and regression tests depend on them. Changing any
value is a breaking change for recorded fixtures.
"""

C0 = 299792458.0  # speed of light in vacuum [m/s]

# Default imaging configuration: 0.15 m square DOI on a 64x64 grid,
# 36 transmitters / 36 receivers on a ring of radius 20*lambda at 4 GHz.
DEFAULT_FREQ_HZ = 4e9
DEFAULT_DOI_M = 0.15
DEFAULT_GRID_M = 64
DEFAULT_N_TX = 36
DEFAULT_N_RX = 36
DEFAULT_RING_RADIUS_FACTOR = 20.0  # ring radius in wavelengths

# Builtin scatterer profiles, keyed by case name. All lengths in meters,
# all permittivities relative. Geometries are fixed reference values chosen
# to fit the 0.15 m DOI.
BUILTIN_PROFILES = {
    # Annulus ("ring") plus two discs above it, uniform eps_r = 2.
    "austria": [
        ("disc", (-0.025, 0.03), {"radius": 0.015}, 2.0 + 0.0j),
        ("disc", (0.025, 0.03), {"radius": 0.015}, 2.0 + 0.0j),
        ("annulus", (0.0, -0.015), {"r_outer": 0.045, "r_inner": 0.030}, 2.0 + 0.0j),
    ],
    # Two overlapping discs on top of a ring-shaped background.
    "overlap-ring": [
        ("annulus", (0.0, 0.0), {"r_outer": 0.055, "r_inner": 0.040}, 1.5 + 0.0j),
        ("disc", (-0.015, 0.01), {"radius": 0.022}, 2.0 + 0.0j),
        ("disc", (0.015, -0.01), {"radius": 0.022}, 2.5 + 0.0j),
    ],
    # Three discs of different sizes and contrasts; the small one on the
    # left is deliberately low-contrast.
    "three-discs": [
        ("disc", (-0.04, 0.0), {"radius": 0.012}, 1.3 + 0.0j),
        ("disc", (0.03, 0.03), {"radius": 0.020}, 2.0 + 0.0j),
        ("disc", (0.02, -0.035), {"radius": 0.025}, 1.6 + 0.0j),
    ],
    # Two overlapping discs superimposed on a large circular background.
    "overlap-disc": [
        ("disc", (0.0, 0.0), {"radius": 0.055}, 1.4 + 0.0j),
        ("disc", (-0.018, 0.012), {"radius": 0.025}, 2.0 + 0.0j),
        ("disc", (0.018, -0.012), {"radius": 0.025}, 2.4 + 0.0j),
    ],
    # Concentric discs with different radii and permittivities (weak outer,
    # strong inner).
    "concentric": [
        ("disc", (0.0, 0.0), {"radius": 0.050}, 1.4 + 0.0j),
        ("disc", (0.0, 0.0), {"radius": 0.025}, 2.2 + 0.0j),
    ],
    # Overlapping rectangles with sharp corners and a weak central square.
    "corner-overlap": [
        ("rectangle", (-0.02, 0.02), {"half_w": 0.03, "half_h": 0.03}, 2.0 + 0.0j),
        ("rectangle", (0.02, -0.02), {"half_w": 0.03, "half_h": 0.03}, 2.4 + 0.0j),
        ("rectangle", (0.0, 0.0), {"half_w": 0.012, "half_h": 0.012}, 1.4 + 0.0j),
    ],
}

# Reference per-case reconstruction times [s] reported for this method on
# the original GPU workstation; informational only, never asserted.
REFERENCE_TIMINGS_S = {
    "austria": 27.91,
    "overlap-ring": 28.24,
    "three-discs": 27.55,
    "overlap-disc": 28.87,
    "concentric": 28.47,
    "corner-overlap": 27.30,
}
