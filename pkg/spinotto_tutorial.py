#!/usr/bin/env python
# Walk through one engine cycle, the limit cycle and a cycle-time sweep.

# ### Import spinotto classes and methods

import os
import tempfile

from spinotto import (
    CycleSpec,
    LevelDistribution,
    RateTable,
    SweepSpec,
    efficiency_closed_form,
    export_results,
    find_limit_cycle,
    run_cycle,
    run_sweep,
)

# ### One cycle from the fully polarized state

spec = CycleSpec(470, 470, initial=LevelDistribution.polarized(0))
print(spec)

record = run_cycle(spec)
print(record)
print(record.ledger)

# ### Limit cycle

limit, iterations = find_limit_cycle(spec)
print('limit cycle reached after {} cycles'.format(iterations))
print('efficiency', limit.eta)
print('closed form', efficiency_closed_form(spec.field, spec.constants))
print('power', limit.power)

# ### A slower bath

slow = CycleSpec(470, 470, rates=RateTable.uniform(0.005))
print(find_limit_cycle(slow)[0])

# ### Sweep the stroke duration, sampling 1000 atoms per point

sweep = SweepSpec(CycleSpec(470, 470), n_traj=1000, seed=1)
result = run_sweep(sweep, show_progress=True)
print(result)
print(result.to_frame().head())

with tempfile.TemporaryDirectory() as tmpdir:
    path = export_results(result, os.path.join(tmpdir, 'sweep.csv'))
    with open(path, 'r') as fd:
        print(fd.readline())
