'''
Helpers shared by the oracle and the experiment harness.
'''

from __future__ import absolute_import
import logging
import multiprocessing
import os

import progressbar

log = logging.getLogger(__name__)

THREADS_VARIABLE = "CRN_THREADS"


def worker_count(default=1):
    """
    Number of pool workers, taken from the CRN_THREADS environment variable.
    """
    value = os.environ.get(THREADS_VARIABLE)
    if value is None or value.strip() == "":
        return default
    try:
        workers = int(value)
    except ValueError:
        raise ValueError("%s must be a positive integer: %r" % (THREADS_VARIABLE, value))
    if workers < 1:
        raise ValueError("%s must be a positive integer: %r" % (THREADS_VARIABLE, value))
    return workers


def multiprocess(entries, process_method, number_of_workers=None, show_progress=False):
    """
    Applies process_method to every entry and returns the results in entry order.

    With a single worker everything runs inline. Otherwise a bounded
    multiprocessing pool is used; process_method and the entries must be
    picklable.

    Args:
        entries (list): Work items.
        process_method (callable): Module-level function taking one entry.
        number_of_workers (int): Pool size. Defaults to CRN_THREADS or 1.
        show_progress (bool): Draw a progress bar.

    Returns:
        list: One result per entry, in order.
    """
    entries = list(entries)
    if number_of_workers is None:
        number_of_workers = worker_count()
    number_of_workers = max(1, min(number_of_workers, len(entries) or 1))
    log.debug("Processing %d entries with %d workers" % (len(entries), number_of_workers))

    bar = progressbar.ProgressBar(max_value=len(entries)) if show_progress and entries else None
    results = []
    if number_of_workers == 1:
        for index, entry in enumerate(entries):
            results.append(process_method(entry))
            if bar is not None:
                bar.update(index + 1)
    else:
        pool = multiprocessing.Pool(number_of_workers)
        try:
            for index, result in enumerate(pool.imap(process_method, entries)):
                results.append(result)
                if bar is not None:
                    bar.update(index + 1)
        except Exception:
            log.exception("A worker failed")
            raise
        finally:
            pool.close()
            pool.join()
    if bar is not None:
        bar.finish()
    return results
