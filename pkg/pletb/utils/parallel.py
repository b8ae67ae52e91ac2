import logging
from concurrent.futures import ProcessPoolExecutor

logger = logging.getLogger(__name__)


def ordered_map(func, items, workers=None, chunksize=1):
    """Map ``func`` over ``items`` keeping input order.

    With ``workers`` > 1 the calls run in a process pool; ``func`` and the items must then
    be picklable. Output never depends on ``workers``.
    """
    items = list(items)
    if not workers or workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    workers = min(workers, len(items))
    logger.debug("dispatching %d work units to %d processes", len(items), workers)
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items, chunksize=chunksize))
