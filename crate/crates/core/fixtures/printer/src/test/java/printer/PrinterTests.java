package printer;

import minirunner.TestCase;

public class PrinterTests extends TestCase {
    public void testOrigin() {
        assertEquals("point", new Printer().origin());
    }

    public void testCountUp() {
        assertTrue("count", new Printer().countUp(5) == 5);
    }

    public void testMaskKeepsMiddleBits() {
        assertEquals(2, new Printer().mask(3));
    }
}
