"""Exception types raised across the package."""


class InvalidArgument(ValueError):
    """A caller supplied a value outside an operation's domain."""


class DivergedTrajectory(RuntimeError):
    """A leapfrog trajectory produced a non-finite state or blew up in energy."""

    def __init__(self, step, message="trajectory diverged"):
        super().__init__(f"{message} at leapfrog step {step}")
        self.step = step


class UnsupportedGeometry(NotImplementedError):
    """The reflective sampler cannot intersect trajectories with this region."""
