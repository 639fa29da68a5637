"""Exception types raised across the toolkit."""


class PencilError(Exception):
    pass


class ParamsError(PencilError):
    """Invalid or mismatched cryptographic parameters."""


class EncodeRangeError(PencilError):
    """Fixed-point encoding input outside the representable range."""


class ScaleError(PencilError):
    """Mixed fixed-point scales where equal scales are required."""


class ShapeError(PencilError):
    """Tensor shapes incompatible with the requested operation."""


class FormError(PencilError):
    """Polynomial supplied in the wrong (coefficient vs NTT) form."""


class GeometryError(PencilError):
    """Packing geometry does not fit the polynomial degree."""


class DesyncError(PencilError):
    """The two parties disagree on protocol phase or layer id."""


class HandshakeError(PencilError):
    """Session establishment failed (version or parameter mismatch)."""


class BankError(PencilError):
    """Mask bank missing, exhausted or incompatible with the operator."""
