package minirunner;

/** Base class for test classes: every public no-argument method named test* is a test. */
public abstract class TestCase {
    public static void fail(String message) {
        throw new AssertionFailure(message);
    }

    public static void assertTrue(String message, boolean condition) {
        if (!condition) {
            fail(message);
        }
    }

    public static void assertEquals(String expected, String actual) {
        if (expected == null ? actual != null : !expected.equals(actual)) {
            fail("expected <" + expected + "> but was <" + actual + ">");
        }
    }

    public static void assertEquals(double expected, double actual) {
        if (Math.abs(expected - actual) > 1e-9) {
            fail("expected <" + expected + "> but was <" + actual + ">");
        }
    }

    public static void assertEquals(int expected, int actual) {
        if (expected != actual) {
            fail("expected <" + expected + "> but was <" + actual + ">");
        }
    }

    public static void assertSame(Object expected, Object actual) {
        if (expected != actual) {
            fail("expected same <" + expected + "> but was <" + actual + ">");
        }
    }
}
