# SPDX-License-Identifier: GPL-3.0-or-later
import logging
from abc import ABC, abstractmethod
from typing import Any, Dict, NoReturn, Type, TypeVar

log = logging.getLogger("cottools.stepentropy")

__BACKENDS: Dict[str, Type["Backend"]] = {}


class Backend(ABC):
    """
    The base class for answer producing backends.

    Sweeps only need to continue a compressed-inference prompt with a final
    answer; each subclass decides how that continuation is obtained.
    """

    name = "backend"

    @abstractmethod
    def answer(self, prompt: str) -> str:
        """
        Continue a compressed-inference prompt and return the generated answer text.

        Args:
            prompt (str)
                The prompt ending right after ``</think>``.
        Returns:
            The generated continuation.
        """

    def settings(self) -> Dict[str, Any]:
        """Return the settings that change this backend's answers; empty by default."""
        return {}

    @staticmethod
    def raise_error(exception: Type[Exception], message: str) -> NoReturn:
        """
        Log and raise an error.

        Args:
            exception (Exception)
                The exception type to raise.
            message (str)
                The error message.
        Raises:
            Exception: the requested exception with the incoming message.
        """
        log.error(message)
        raise exception(message)


B = TypeVar("B", bound=Backend)


def register_backend(backend: Type[B], *aliases: str) -> None:
    """
    Register a backend class under one or more names.

    Args:
        backend:
            The Backend subclass.
        *aliases:
            Names the backend can be requested with.
    """
    for alias in aliases:
        __BACKENDS.update({alias: backend})


def get_backend(name: str, *args: Any, **kwargs: Any) -> Backend:
    """
    Instantiate the backend registered under ``name``.

    Raises:
        ValueError: if no backend has been registered with that name.
    """
    klass = __BACKENDS.get(name)
    if not klass or not issubclass(klass, Backend):
        message = f"No backend found for {name}"
        log.error(message)
        raise ValueError(message)
    return klass(*args, **kwargs)
