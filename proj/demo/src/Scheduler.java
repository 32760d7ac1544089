package demo;

import java.util.List;

public class Scheduler {
    private long lastRun;
    private int failures;

    public long nextRun(String unit, int amount, long now) {
        long step;
        switch (unit) {
            case "seconds":
                step = amount * 1000L;
                break;
            case "minutes":
                step = amount * 60_000L;
                break;
            case "hours":
                step = amount * 3_600_000L;
                break;
            default:
                throw new IllegalArgumentException("unknown unit " + unit);
        }
        long next = lastRun + step;
        if (next < now) {
            next = now;
        }
        if (failures > 3) {
            next += step * failures;
        }
        lastRun = next;
        return next;
    }

    public int retryAll(List<Runnable> jobs, int attempts) {
        int done = 0;
        for (Runnable job : jobs) {
            int tries = 0;
            boolean ok = false;
            while (!ok && tries < attempts) {
                tries++;
                try {
                    job.run();
                    ok = true;
                } catch (RuntimeException e) {
                    failures++;
                }
            }
            if (ok) {
                done++;
            }
        }
        if (done < jobs.size()) {
            System.err.println((jobs.size() - done) + " jobs failed");
        }
        return done;
    }
}
